use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cancel::CancelToken;
use crate::ml::{check_fit_input, check_shape, Classifier, FitContext, FitError, Labelled, Matrix};

use super::argmax;

/// Row scores `W x + b` for a `n_classes x (d + 1)` weight layout, bias last.
fn scores(weights: &[f64], row: &[f64], n_classes: usize, out: &mut [f64]) {
    let stride = row.len() + 1;
    for (c, score) in out.iter_mut().enumerate().take(n_classes) {
        let w = &weights[c * stride..(c + 1) * stride];
        *score = w[row.len()] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Mean multinomial cross-entropy plus `alpha / 2 * ||W||^2` (bias excluded)
/// and its gradient, for weights laid out as `n_classes` rows of `d + 1`
/// (bias last).
pub fn softmax_loss_gradient(
    weights: &[f64],
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    alpha: f64,
) -> (f64, Vec<f64>) {
    let d = x.cols();
    let stride = d + 1;
    let n = x.rows() as f64;
    let mut grad = vec![0.0; weights.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (row, &label) in x.iter_rows().zip(y) {
        scores(weights, row, n_classes, &mut z);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|s| (s - max).exp()).sum();
        let log_norm = max + sum.ln();
        loss += log_norm - z[label];
        for c in 0..n_classes {
            let p = (z[c] - log_norm).exp();
            let delta = (p - if c == label { 1.0 } else { 0.0 }) / n;
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += delta * xj;
            }
            g[d] += delta;
        }
    }
    loss /= n;
    for c in 0..n_classes {
        for j in 0..d {
            let w = weights[c * stride + j];
            loss += 0.5 * alpha * w * w;
            grad[c * stride + j] += alpha * w;
        }
    }
    (loss, grad)
}

/// Multinomial logistic regression trained by full-batch gradient descent
/// from zero weights.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    alpha: f64,
    max_iter: usize,
    learning_rate: f64,
    weights: Vec<f64>,
    n_classes: usize,
    n_features: usize,
    losses: Vec<f64>,
}

impl LogisticRegression {
    pub fn new(alpha: f64, max_iter: usize, learning_rate: f64) -> Self {
        Self { alpha, max_iter, learning_rate, weights: Vec::new(), n_classes: 0, n_features: 0, losses: Vec::new() }
    }

    /// Training loss before each gradient step, then after the last one.
    pub fn loss_history(&self) -> &[f64] {
        &self.losses
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Classifier for LogisticRegression {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.n_classes = data.n_classes;
        self.n_features = data.x.cols();
        self.weights = vec![0.0; data.n_classes * (data.x.cols() + 1)];
        self.losses.clear();
        for _ in 0..self.max_iter {
            ctx.cancel.check()?;
            let (loss, grad) = softmax_loss_gradient(&self.weights, data.x, data.y, data.n_classes, self.alpha);
            if !loss.is_finite() {
                return Err(FitError::Numerical("logistic regression diverged".into()));
            }
            self.losses.push(loss);
            for (w, g) in self.weights.iter_mut().zip(&grad) {
                *w -= self.learning_rate * g;
            }
        }
        let (loss, _) = softmax_loss_gradient(&self.weights, data.x, data.y, data.n_classes, self.alpha);
        if !loss.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(FitError::Numerical("logistic regression diverged".into()));
        }
        self.losses.push(loss);
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        if self.weights.is_empty() {
            return Err(FitError::Numerical("logistic regression is not fitted".into()));
        }
        check_shape(x, self.n_features)?;
        cancel.check()?;
        let mut z = vec![0.0; self.n_classes];
        Ok(x.iter_rows()
            .map(|row| {
                scores(&self.weights, row, self.n_classes, &mut z);
                argmax(&z)
            })
            .collect())
    }
}

/// Multi-class perceptron: on a mistake the true class row gains
/// `eta0 * x` and the predicted row loses it. Rows are visited in a seeded
/// shuffled order each epoch.
#[derive(Debug, Clone)]
pub struct Perceptron {
    epochs: usize,
    eta0: f64,
    weights: Vec<f64>,
    n_classes: usize,
    n_features: usize,
}

impl Perceptron {
    pub fn new(epochs: usize, eta0: f64) -> Self {
        Self { epochs, eta0, weights: Vec::new(), n_classes: 0, n_features: 0 }
    }
}

impl Classifier for Perceptron {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        let d = data.x.cols();
        let stride = d + 1;
        self.n_classes = data.n_classes;
        self.n_features = d;
        self.weights = vec![0.0; data.n_classes * stride];
        let mut order: Vec<usize> = (0..data.x.rows()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut z = vec![0.0; data.n_classes];
        for _ in 0..self.epochs {
            ctx.cancel.check()?;
            order.shuffle(&mut rng);
            let mut mistakes = 0;
            for &i in &order {
                let row = data.x.row(i);
                scores(&self.weights, row, data.n_classes, &mut z);
                let predicted = argmax(&z);
                let truth = data.y[i];
                if predicted != truth {
                    mistakes += 1;
                    for (j, &v) in row.iter().enumerate() {
                        self.weights[truth * stride + j] += self.eta0 * v;
                        self.weights[predicted * stride + j] -= self.eta0 * v;
                    }
                    self.weights[truth * stride + d] += self.eta0;
                    self.weights[predicted * stride + d] -= self.eta0;
                }
            }
            if mistakes == 0 {
                break;
            }
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(FitError::Numerical("perceptron weights overflowed".into()));
        }
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        if self.weights.is_empty() {
            return Err(FitError::Numerical("perceptron is not fitted".into()));
        }
        check_shape(x, self.n_features)?;
        cancel.check()?;
        let mut z = vec![0.0; self.n_classes];
        Ok(x.iter_rows()
            .map(|row| {
                scores(&self.weights, row, self.n_classes, &mut z);
                argmax(&z)
            })
            .collect())
    }
}
