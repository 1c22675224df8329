use crate::cancel::CancelToken;
use crate::ml::{check_fit_input, check_shape, Classifier, FitContext, FitError, Labelled, Matrix};

use super::argmax;

/// Gaussian naive Bayes with per-class feature means and variances.
///
/// `var_smoothing` times the largest feature variance is added to every
/// variance (floored at 1e-12) so constant features stay usable.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    var_smoothing: f64,
    classes: Vec<ClassModel>,
    n_features: usize,
}

#[derive(Debug, Clone)]
struct ClassModel {
    class: usize,
    log_prior: f64,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl GaussianNb {
    pub fn new(var_smoothing: f64) -> Self {
        Self { var_smoothing, classes: Vec::new(), n_features: 0 }
    }
}

impl Classifier for GaussianNb {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        let (n, d) = (data.x.rows(), data.x.cols());
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let col = data.x.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            max_var = max_var.max(col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64);
        }
        let epsilon = (self.var_smoothing * max_var).max(1e-12);

        self.n_features = d;
        self.classes.clear();
        for class in 0..data.n_classes {
            let rows: Vec<usize> = (0..n).filter(|&i| data.y[i] == class).collect();
            if rows.is_empty() {
                continue;
            }
            let m = rows.len() as f64;
            let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|&i| data.x.get(i, j)).sum::<f64>() / m).collect();
            let variances: Vec<f64> = (0..d)
                .map(|j| rows.iter().map(|&i| (data.x.get(i, j) - means[j]).powi(2)).sum::<f64>() / m + epsilon)
                .collect();
            self.classes.push(ClassModel { class, log_prior: (m / n as f64).ln(), means, variances });
        }
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        if self.classes.is_empty() {
            return Err(FitError::Numerical("naive Bayes is not fitted".into()));
        }
        check_shape(x, self.n_features)?;
        cancel.check()?;
        let log_two_pi = (2.0 * std::f64::consts::PI).ln();
        Ok(x.iter_rows()
            .map(|row| {
                let scores: Vec<f64> = self
                    .classes
                    .iter()
                    .map(|m| {
                        m.log_prior
                            - 0.5
                                * row
                                    .iter()
                                    .zip(m.means.iter().zip(&m.variances))
                                    .map(|(v, (mu, var))| log_two_pi + var.ln() + (v - mu).powi(2) / var)
                                    .sum::<f64>()
                    })
                    .collect();
                self.classes[argmax(&scores)].class
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_gaussians() {
        let x = Matrix::from_rows(&[[0.0], [0.5], [-0.5], [10.0], [10.5], [9.5]]);
        let y = [0, 0, 0, 1, 1, 1];
        let cancel = CancelToken::new();
        let mut nb = GaussianNb::new(1e-9);
        nb.fit(Labelled { x: &x, y: &y, n_classes: 2 }, FitContext::new(&cancel, 0)).unwrap();
        assert_eq!(nb.predict(&x, &cancel).unwrap(), y.to_vec());
        assert_eq!(nb.predict(&Matrix::from_rows(&[[4.0], [6.0]]), &cancel).unwrap(), vec![0, 1]);
    }

    #[test]
    fn constant_feature_is_tolerated() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        let y = [0, 1];
        let cancel = CancelToken::new();
        let mut nb = GaussianNb::new(0.0);
        nb.fit(Labelled { x: &x, y: &y, n_classes: 2 }, FitContext::new(&cancel, 0)).unwrap();
        assert_eq!(nb.predict(&x, &cancel).unwrap(), vec![0, 1]);
    }
}
