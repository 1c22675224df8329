use crate::cancel::CancelToken;
use crate::ml::{check_fit_input, check_shape, minkowski, Classifier, FitContext, FitError, Labelled, Matrix};

use super::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnWeights {
    Uniform,
    Distance,
}

/// k-nearest-neighbours vote under the Minkowski distance of order `p`.
///
/// Neighbours at equal distance are ordered by training row index. With
/// distance weighting, exact matches (distance 0) outvote everything else.
/// Vote ties go to the lowest class index.
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    weights: KnnWeights,
    p: u32,
    x: Option<Matrix>,
    y: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    pub fn new(k: usize, weights: KnnWeights, p: u32) -> Self {
        Self { k: k.max(1), weights, p, x: None, y: Vec::new(), n_classes: 0 }
    }
}

impl Classifier for Knn {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.x = Some(data.x.clone());
        self.y = data.y.to_vec();
        self.n_classes = data.n_classes;
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        let train = self.x.as_ref().ok_or_else(|| FitError::Numerical("knn is not fitted".into()))?;
        check_shape(x, train.cols())?;
        let k = self.k.min(train.rows());
        let mut out = Vec::with_capacity(x.rows());
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(train.rows());
        for (q, query) in x.iter_rows().enumerate() {
            if q % 64 == 0 {
                cancel.check()?;
            }
            dists.clear();
            dists.extend(train.iter_rows().enumerate().map(|(i, row)| (minkowski(query, row, self.p), i)));
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let neighbours = &dists[..k];
            let mut votes = vec![0.0; self.n_classes];
            match self.weights {
                KnnWeights::Uniform => {
                    for &(_, i) in neighbours {
                        votes[self.y[i]] += 1.0;
                    }
                }
                KnnWeights::Distance => {
                    if neighbours[0].0 == 0.0 {
                        for &(d, i) in neighbours.iter().take_while(|(d, _)| *d == 0.0) {
                            debug_assert_eq!(d, 0.0);
                            votes[self.y[i]] += 1.0;
                        }
                    } else {
                        for &(d, i) in neighbours {
                            votes[self.y[i]] += 1.0 / d;
                        }
                    }
                }
            }
            out.push(argmax(&votes));
        }
        Ok(out)
    }
}

/// Assigns each row to the class whose training centroid is closest.
#[derive(Debug, Clone)]
pub struct NearestCentroid {
    p: u32,
    centroids: Vec<(usize, Vec<f64>)>,
}

impl NearestCentroid {
    pub fn new(p: u32) -> Self {
        Self { p, centroids: Vec::new() }
    }

    pub fn centroids(&self) -> &[(usize, Vec<f64>)] {
        &self.centroids
    }
}

impl Classifier for NearestCentroid {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        let cols = data.x.cols();
        let mut sums = vec![vec![0.0; cols]; data.n_classes];
        let mut counts = vec![0usize; data.n_classes];
        for (row, &label) in data.x.iter_rows().zip(data.y) {
            counts[label] += 1;
            for (s, v) in sums[label].iter_mut().zip(row) {
                *s += v;
            }
        }
        self.centroids = sums
            .into_iter()
            .enumerate()
            .filter(|(c, _)| counts[*c] > 0)
            .map(|(c, s)| (c, s.into_iter().map(|v| v / counts[c] as f64).collect()))
            .collect();
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        let cols = self
            .centroids
            .first()
            .map(|c| c.1.len())
            .ok_or_else(|| FitError::Numerical("nearest centroid is not fitted".into()))?;
        check_shape(x, cols)?;
        cancel.check()?;
        Ok(x.iter_rows()
            .map(|row| {
                let mut best = (f64::INFINITY, 0);
                for (class, centroid) in &self.centroids {
                    let d = minkowski(row, centroid, self.p);
                    if d < best.0 {
                        best = (d, *class);
                    }
                }
                best.1
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(c: &mut dyn Classifier, x: &Matrix, y: &[usize], n_classes: usize) {
        let cancel = CancelToken::new();
        c.fit(Labelled { x, y, n_classes }, FitContext::new(&cancel, 0)).unwrap();
    }

    #[test]
    fn one_nearest_neighbour() {
        let x = Matrix::from_rows(&[[0.0], [10.0]]);
        let mut knn = Knn::new(1, KnnWeights::Uniform, 2);
        fit(&mut knn, &x, &[0, 1], 2);
        assert_eq!(knn.predict(&Matrix::from_rows(&[[1.0]]), &CancelToken::new()).unwrap(), vec![0]);
    }

    #[test]
    fn distance_weighting_outvotes_majority() {
        let x = Matrix::from_rows(&[[0.0], [5.0], [5.5], [6.0]]);
        let y = [0, 1, 1, 1];
        let mut uniform = Knn::new(4, KnnWeights::Uniform, 2);
        let mut weighted = Knn::new(4, KnnWeights::Distance, 2);
        fit(&mut uniform, &x, &y, 2);
        fit(&mut weighted, &x, &y, 2);
        let q = Matrix::from_rows(&[[0.1]]);
        assert_eq!(uniform.predict(&q, &CancelToken::new()).unwrap(), vec![1]);
        assert_eq!(weighted.predict(&q, &CancelToken::new()).unwrap(), vec![0]);
    }

    #[test]
    fn centroid_prediction() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 2.0], [10.0, 10.0], [10.0, 12.0]]);
        let mut nc = NearestCentroid::new(2);
        fit(&mut nc, &x, &[0, 0, 1, 1], 2);
        assert_eq!(nc.centroids()[0].1, vec![0.0, 1.0]);
        assert_eq!(nc.predict(&Matrix::from_rows(&[[9.0, 9.0], [1.0, 1.0]]), &CancelToken::new()).unwrap(), vec![1, 0]);
    }

    #[test]
    fn cancelled_prediction() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]);
        let mut knn = Knn::new(1, KnnWeights::Uniform, 2);
        fit(&mut knn, &x, &[0, 1], 2);
        let cancel = CancelToken::new();
        cancel.cancel();
        assert_eq!(knn.predict(&x, &cancel), Err(FitError::Cancelled));
    }
}
