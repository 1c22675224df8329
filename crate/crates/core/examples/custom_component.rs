//! Extend the search space with a user-defined classifier: register it,
//! mention it in a grammar, and evolve.
//!
//! cargo run --release --example custom_component

use dsge_pipelines::cancel::CancelToken;
use dsge_pipelines::harness::{execute, RunConfig};
use dsge_pipelines::ml::synthetic::Blobs;
use dsge_pipelines::ml::{Classifier, FitContext, FitError, Labelled, Matrix};
use dsge_pipelines::pipeline::{Component, ComponentDef, ParamDef, ParamKind, ParamValue, Registry, Role};

/// Predicts by thresholding a single feature.
struct Threshold {
    feature: usize,
    cut: f64,
}

impl Classifier for Threshold {
    fn fit(&mut self, data: Labelled<'_>, _: FitContext<'_>) -> Result<(), FitError> {
        let col = data.x.column(self.feature.min(data.x.cols() - 1));
        self.cut = col.iter().sum::<f64>() / col.len() as f64;
        Ok(())
    }

    fn predict(&self, x: &Matrix, _: &CancelToken) -> Result<Vec<usize>, FitError> {
        Ok(x.iter_rows().map(|r| usize::from(r[self.feature.min(r.len() - 1)] < self.cut)).collect())
    }
}

fn main() {
    let mut registry = Registry::standard();
    registry
        .register(ComponentDef::new(
            "threshold",
            Role::Classifier,
            vec![ParamDef::new("feature", ParamKind::Int { min: 0, max: 9 }, ParamValue::Int(0))],
            |spec| {
                let Some(ParamValue::Int(feature)) = spec.param("feature") else { unreachable!() };
                Component::Classifier(Box::new(Threshold { feature: *feature as usize, cut: 0.0 }))
            },
        ))
        .unwrap();

    let grammar = "\
<pipeline> ::= <scaler> <clf> | <clf>
<scaler> ::= preprocessing:standard_scaler | preprocessing:min_max_scaler
<clf> ::= classifier:threshold feature:RANDINT(0,9) | classifier:gaussian_nb
";
    let data = Blobs::default().generate(9);
    let config = RunConfig { seed: 3, population: 16, generations: 8, top_k: 5, ..Default::default() };
    let report = execute(&config, grammar, &data, &registry).unwrap();
    for g in &report.generations {
        println!("gen {}: best {:.3} {:?}", g.generation, g.best, g.method_frequencies.classifier);
    }
    println!("best: {} -> test {:?}", report.best.phenotype, report.test.metrics().map(|m| m.macro_f));
}
