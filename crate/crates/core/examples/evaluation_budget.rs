//! The per-evaluation time budget: slow evaluations become timeouts with the
//! worst fitness instead of stalling or aborting the search.
//!
//! cargo run --example evaluation_budget

use std::time::Duration;

use dsge_pipelines::cancel::CancelToken;
use dsge_pipelines::evolution::{evaluate_with_budget, EvalFailure};
use dsge_pipelines::Phenotype;

fn main() {
    let phenotype = Phenotype::parse("classifier:knn");
    let budget = Duration::from_millis(200);

    let quick = |_: &Phenotype, _: &CancelToken| Ok(0.87);
    println!("quick: {:?}", evaluate_with_budget(&quick, &phenotype, budget));

    // Polls the token between units of work, as the built-in components do.
    let slow = |_: &Phenotype, cancel: &CancelToken| -> Result<f64, EvalFailure> {
        for _ in 0..100 {
            cancel.check().map_err(|_| EvalFailure::Timeout)?;
            std::thread::sleep(Duration::from_millis(10));
        }
        Ok(0.99)
    };
    println!("slow: {:?}", evaluate_with_budget(&slow, &phenotype, budget));

    let failing = |_: &Phenotype, _: &CancelToken| Err(EvalFailure::Resource("singular matrix".into()));
    println!("failing: {:?}", evaluate_with_budget(&failing, &phenotype, budget));
}
