//! Native execution substrate: datasets, preprocessing and classification
//! components, the F-measure, and stratified cross-validation.
//!
//! Every component works in `f64`. Only the imputer accepts missing values
//! (`NaN`); the pipeline runner rejects `NaN` input for every other component.

pub mod classifiers;
mod cv;
mod dataset;
mod folds;
mod matrix;
mod metrics;
pub mod preprocess;
pub mod synthetic;

use crate::cancel::{CancelToken, Cancelled};

pub use cv::cv_fitness;
pub use dataset::{load_csv, read_csv, Dataset, DatasetError};
pub use folds::{stratified_folds, stratified_holdout, FoldError, FoldPlan};
pub use matrix::{minkowski, Matrix};
pub use metrics::{confusion_matrix, f_measure, per_class_f_measure};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("cancelled")]
    Cancelled,
    /// Degenerate data or a numerical breakdown inside a component.
    #[error("{0}")]
    Numerical(String),
}

impl From<Cancelled> for FitError {
    fn from(_: Cancelled) -> Self {
        FitError::Cancelled
    }
}

/// Everything a component needs besides the data itself.
#[derive(Debug, Clone, Copy)]
pub struct FitContext<'a> {
    pub cancel: &'a CancelToken,
    /// Seed for components with internal randomness.
    pub seed: u64,
}

impl<'a> FitContext<'a> {
    pub fn new(cancel: &'a CancelToken, seed: u64) -> Self {
        Self { cancel, seed }
    }
}

/// Labelled training data handed to `fit`.
#[derive(Debug, Clone, Copy)]
pub struct Labelled<'a> {
    pub x: &'a Matrix,
    pub y: &'a [usize],
    pub n_classes: usize,
}

pub trait Transformer: Send + Sync {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError>;
    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError>;

    fn accepts_missing(&self) -> bool {
        false
    }
}

pub trait Classifier: Send + Sync {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError>;
    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError>;
}

pub(crate) fn check_shape(x: &Matrix, expected_cols: usize) -> Result<(), FitError> {
    if x.cols() != expected_cols {
        return Err(FitError::Numerical(format!("expected {expected_cols} features, got {}", x.cols())));
    }
    Ok(())
}

pub(crate) fn check_fit_input(data: &Labelled<'_>) -> Result<(), FitError> {
    if data.x.rows() == 0 {
        return Err(FitError::Numerical("no training rows".into()));
    }
    if data.x.cols() == 0 {
        return Err(FitError::Numerical("no features".into()));
    }
    Ok(())
}
