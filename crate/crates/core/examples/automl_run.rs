//! A complete search on synthetic data: outer split, evolution with 3-fold
//! cross-validation, final test evaluation, report files and replay.
//!
//! cargo run --release --example automl_run [output-dir]

use std::path::PathBuf;

use dsge_pipelines::harness::{self, RunConfig};
use dsge_pipelines::ml::synthetic::Blobs;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "automl_run_out".into()));
    std::fs::create_dir_all(&out).unwrap();
    let csv = out.join("blobs.csv");
    Blobs::default().generate(1).write_csv(&csv, "class").unwrap();

    let config = RunConfig {
        dataset: Some(csv),
        label: Some("class".into()),
        seed: 1,
        population: 20,
        generations: 15,
        budget_secs: 30.0,
        outer_holdout: Some(1.0 / 3.0),
        workers: 4,
        out: out.clone(),
        ..Default::default()
    };
    let report = harness::run(&config).unwrap();
    for g in &report.generations {
        println!("gen {:>2}: best {:.4} classifiers {:?}", g.generation, g.best, g.method_frequencies.classifier);
    }
    println!("best pipeline: {}", report.best.phenotype);
    if let Some(m) = report.test.metrics() {
        println!("test macro-F {:.4}, confusion {:?}", m.macro_f, m.confusion_matrix);
    }

    let outcome = harness::replay(&out.join("report.json"), None).unwrap();
    println!("replay reproduces the test metrics: {}", outcome.matches());
    println!(
        "files: {}",
        ["report.json", "generations.csv", "best_pipeline.json"].map(|f| out.join(f).display().to_string()).join(", ")
    );
}
