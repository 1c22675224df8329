use crate::pipeline::{FittedPipeline, PipelineError, PipelineSpec, Registry};

use super::{f_measure, Dataset, FitContext, FoldPlan};

/// Mean macro F-measure over the folds of `plan`. Any failing fold fails the
/// whole evaluation.
pub fn cv_fitness(
    spec: &PipelineSpec,
    registry: &Registry,
    ds: &Dataset,
    plan: &FoldPlan,
    ctx: FitContext<'_>,
) -> Result<f64, PipelineError> {
    let mut total = 0.0;
    for fold in 0..plan.k() {
        ctx.cancel.check().map_err(|_| PipelineError::Timeout)?;
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let x_train = ds.features().select_rows(&train);
        let y_train: Vec<usize> = train.iter().map(|&i| ds.labels()[i]).collect();
        let fitted = FittedPipeline::fit(spec, registry, &x_train, &y_train, ds.n_classes(), ctx)?;
        let predicted = fitted.predict(&ds.features().select_rows(&test), ctx.cancel)?;
        let truth: Vec<usize> = test.iter().map(|&i| ds.labels()[i]).collect();
        total += f_measure(&truth, &predicted, ds.n_classes());
    }
    Ok(total / plan.k() as f64)
}
