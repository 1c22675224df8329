use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cancel::CancelToken;
use crate::dsge::Phenotype;

/// Fitness given to every individual whose evaluation did not succeed. It
/// sits below the [0, 1] metric range, so no special casing is needed when
/// ranking.
pub const WORST_FITNESS: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    Timeout,
    ResourceFailure,
    CompileFailure,
    DepthFailure,
}

impl EvalStatus {
    pub const ALL: [EvalStatus; 5] = [
        EvalStatus::Ok,
        EvalStatus::Timeout,
        EvalStatus::ResourceFailure,
        EvalStatus::CompileFailure,
        EvalStatus::DepthFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalStatus::Ok => "ok",
            EvalStatus::Timeout => "timeout",
            EvalStatus::ResourceFailure => "resource_failure",
            EvalStatus::CompileFailure => "compile_failure",
            EvalStatus::DepthFailure => "depth_failure",
        }
    }
}

/// Ways an evaluator can decline to produce a score.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalFailure {
    #[error("evaluation cancelled")]
    Timeout,
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Compile(String),
}

/// A fitness function over phenotypes. Implementations should poll `cancel`
/// regularly; an evaluator that ignores it still gets classed as a timeout
/// once it returns late, but it holds its worker until then.
pub trait Evaluator: Sync {
    fn evaluate(&self, phenotype: &Phenotype, cancel: &CancelToken) -> Result<f64, EvalFailure>;
}

impl<F> Evaluator for F
where
    F: Fn(&Phenotype, &CancelToken) -> Result<f64, EvalFailure> + Sync,
{
    fn evaluate(&self, phenotype: &Phenotype, cancel: &CancelToken) -> Result<f64, EvalFailure> {
        self(phenotype, cancel)
    }
}

/// Runs `evaluator` under a wall-clock budget. Never fails: late results,
/// errors, non-finite scores and panics all become [`WORST_FITNESS`] with the
/// matching status.
pub fn evaluate_with_budget<E: Evaluator + ?Sized>(
    evaluator: &E,
    phenotype: &Phenotype,
    budget: Duration,
) -> (f64, EvalStatus) {
    let cancel = CancelToken::with_deadline(budget);
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| evaluator.evaluate(phenotype, &cancel)));
    let late = start.elapsed() > budget;
    match outcome {
        Ok(Ok(_)) if late => (WORST_FITNESS, EvalStatus::Timeout),
        Ok(Ok(f)) if f.is_finite() => (f, EvalStatus::Ok),
        Ok(Ok(_)) => (WORST_FITNESS, EvalStatus::ResourceFailure),
        Ok(Err(EvalFailure::Timeout)) => (WORST_FITNESS, EvalStatus::Timeout),
        Ok(Err(EvalFailure::Resource(_))) | Err(_) => (WORST_FITNESS, EvalStatus::ResourceFailure),
        Ok(Err(EvalFailure::Compile(_))) => (WORST_FITNESS, EvalStatus::CompileFailure),
    }
}
