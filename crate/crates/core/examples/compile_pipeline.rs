//! Compile a phenotype into a pipeline, train it and score it.
//!
//! cargo run --example compile_pipeline

use dsge_pipelines::cancel::CancelToken;
use dsge_pipelines::ml::synthetic::Blobs;
use dsge_pipelines::ml::{f_measure, stratified_holdout, FitContext};
use dsge_pipelines::pipeline::{compile, fit_predict, Registry};
use dsge_pipelines::Phenotype;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let registry = Registry::standard();
    let phenotype = Phenotype::parse(
        "preprocessing:standard_scaler preprocessing:select_percentile percentile:40 \
         classifier:knn n_neighbors:7 weights:distance",
    );
    let spec = compile(&phenotype, &registry).unwrap();
    println!("compiled: {spec}");
    println!("{}", serde_json::to_string_pretty(&spec).unwrap());

    let data = Blobs::default().generate(42);
    let (train, test) = stratified_holdout(data.labels(), 0.3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let (train, test) = (data.subset(&train), data.subset(&test));
    let cancel = CancelToken::new();
    let predicted = fit_predict(&spec, &registry, &train, &test, FitContext::new(&cancel, 0)).unwrap();
    println!("held-out macro F-measure: {:.3}", f_measure(test.labels(), &predicted, test.n_classes()));

    match compile(&Phenotype::parse("preprocessing:imputer strategy:mean"), &registry) {
        Ok(_) => unreachable!(),
        Err(e) => println!("a pipeline without classifier is rejected: {e}"),
    }
}
