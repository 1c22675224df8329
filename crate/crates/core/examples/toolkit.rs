//! The native ML toolkit on its own: CSV ingestion, stratified folds,
//! preprocessing, classifiers and the F-measure.
//!
//! cargo run --example toolkit

use dsge_pipelines::cancel::CancelToken;
use dsge_pipelines::ml::classifiers::{Criterion, DecisionTree, Knn, KnnWeights};
use dsge_pipelines::ml::preprocess::{ImputeStrategy, Imputer};
use dsge_pipelines::ml::{f_measure, read_csv, stratified_folds, Classifier, FitContext, Labelled, Transformer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CSV: &str = "\
colour,size,weight,class
red,1.0,10,small
blue,1.2,?,small
red,0.9,11,small
blue,1.1,9,small
red,5.0,50,large
blue,5.5,52,large
red,4.8,?,large
blue,5.1,49,large
red,1.05,10.5,small
blue,5.2,51,large
";

fn main() {
    let data = read_csv(CSV.as_bytes(), "class", "?").unwrap();
    println!("features: {:?}", data.feature_names());
    println!("classes: {:?}, labels {:?}", data.class_names(), data.labels());

    let cancel = CancelToken::new();
    let ctx = FitContext::new(&cancel, 0);
    let all = Labelled { x: data.features(), y: data.labels(), n_classes: data.n_classes() };
    let mut imputer = Imputer::new(ImputeStrategy::Median);
    imputer.fit(all, ctx).unwrap();
    let x = imputer.transform(data.features()).unwrap();

    let plan = stratified_folds(data.labels(), 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    println!("fold sizes: {:?}", plan.fold_sizes());
    for fold in 0..plan.k() {
        let (tr, te) = (plan.train_indices(fold), plan.test_indices(fold));
        let y_tr: Vec<usize> = tr.iter().map(|&i| data.labels()[i]).collect();
        let y_te: Vec<usize> = te.iter().map(|&i| data.labels()[i]).collect();
        let train = Labelled { x: &x.select_rows(&tr), y: &y_tr, n_classes: 2 };
        let mut models: Vec<(&str, Box<dyn Classifier>)> = vec![
            ("knn", Box::new(Knn::new(1, KnnWeights::Uniform, 2))),
            ("decision_tree", Box::new(DecisionTree::new(Criterion::Gini, None, 1))),
        ];
        for (name, model) in &mut models {
            model.fit(train, ctx).unwrap();
            let predicted = model.predict(&x.select_rows(&te), &cancel).unwrap();
            println!("fold {fold} {name}: macro-F {:.3}", f_measure(&y_te, &predicted, 2));
        }
    }
}
