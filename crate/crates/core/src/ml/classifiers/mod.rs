//! Classification components.

mod bayes;
mod linear;
mod neighbors;
mod tree;

pub use bayes::GaussianNb;
pub use linear::{LogisticRegression, Perceptron};
pub use neighbors::{Knn, KnnWeights, NearestCentroid};
pub use tree::{Criterion, DecisionTree, RandomForest};

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
