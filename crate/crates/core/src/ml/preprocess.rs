//! Column-wise preprocessing components.

use super::{check_fit_input, check_shape, FitContext, FitError, Labelled, Matrix, Transformer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeStrategy {
    Mean,
    Median,
    MostFrequent,
}

/// Replaces `NaN` cells with a per-column statistic of the observed values.
/// Columns with no observed value are filled with 0.
#[derive(Debug, Clone)]
pub struct Imputer {
    strategy: ImputeStrategy,
    fill: Vec<f64>,
}

impl Imputer {
    pub fn new(strategy: ImputeStrategy) -> Self {
        Self { strategy, fill: Vec::new() }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Most frequent value; ties go to the smallest value.
fn mode(sorted: &[f64]) -> f64 {
    let mut best = sorted[0];
    let mut best_run = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best_run {
            best_run = j - i;
            best = sorted[i];
        }
        i = j;
    }
    best
}

impl Transformer for Imputer {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.fill = (0..data.x.cols())
            .map(|j| {
                let mut observed: Vec<f64> = data.x.column(j).into_iter().filter(|v| !v.is_nan()).collect();
                if observed.is_empty() {
                    return 0.0;
                }
                match self.strategy {
                    ImputeStrategy::Mean => observed.iter().sum::<f64>() / observed.len() as f64,
                    ImputeStrategy::Median | ImputeStrategy::MostFrequent => {
                        observed.sort_by(f64::total_cmp);
                        if self.strategy == ImputeStrategy::Median {
                            median(&observed)
                        } else {
                            mode(&observed)
                        }
                    }
                }
            })
            .collect();
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.fill.len())?;
        Ok(x.map_cells(|j, v| if v.is_nan() { self.fill[j] } else { v }))
    }

    fn accepts_missing(&self) -> bool {
        true
    }
}

fn column_stats(x: &Matrix, j: usize) -> (f64, f64) {
    let col = x.column(j);
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Rescales each column to `[0, 1]` using the training min and max.
/// Constant columns map to 0.
#[derive(Debug, Clone, Default)]
pub struct MinMaxScaler {
    ranges: Vec<(f64, f64)>,
}

impl Transformer for MinMaxScaler {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.ranges = (0..data.x.cols())
            .map(|j| {
                let col = data.x.column(j);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            })
            .collect();
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.ranges.len())?;
        Ok(x.map_cells(|j, v| {
            let (lo, span) = self.ranges[j];
            if span > 0.0 {
                (v - lo) / span
            } else {
                0.0
            }
        }))
    }
}

/// Centers each column and divides by its population standard deviation.
/// Constant columns map to 0.
#[derive(Debug, Clone, Default)]
pub struct StandardScaler {
    stats: Vec<(f64, f64)>,
}

impl Transformer for StandardScaler {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.stats = (0..data.x.cols())
            .map(|j| {
                let (mean, var) = column_stats(data.x, j);
                (mean, var.sqrt())
            })
            .collect();
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.stats.len())?;
        Ok(x.map_cells(|j, v| {
            let (mean, sd) = self.stats[j];
            if sd > 0.0 {
                (v - mean) / sd
            } else {
                0.0
            }
        }))
    }
}

/// Divides each column by its maximum absolute training value.
#[derive(Debug, Clone, Default)]
pub struct MaxAbsScaler {
    scale: Vec<f64>,
}

impl Transformer for MaxAbsScaler {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.scale = (0..data.x.cols()).map(|j| data.x.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.scale.len())?;
        Ok(x.map_cells(|j, v| if self.scale[j] > 0.0 { v / self.scale[j] } else { 0.0 }))
    }
}

/// Keeps the columns whose training variance exceeds `threshold`.
#[derive(Debug, Clone)]
pub struct VarianceThreshold {
    threshold: f64,
    n_features: usize,
    keep: Vec<usize>,
}

impl VarianceThreshold {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, n_features: 0, keep: Vec::new() }
    }

    pub fn kept(&self) -> &[usize] {
        &self.keep
    }
}

impl Transformer for VarianceThreshold {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.n_features = data.x.cols();
        self.keep = (0..data.x.cols()).filter(|&j| column_stats(data.x, j).1 > self.threshold).collect();
        if self.keep.is_empty() {
            return Err(FitError::Numerical(format!("no feature has variance above {}", self.threshold)));
        }
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.n_features)?;
        Ok(x.select_columns(&self.keep))
    }
}

/// One-way ANOVA F statistic of each column against the class labels.
/// Columns with no within-class spread score `+inf` when the class means
/// differ and 0 otherwise.
pub fn anova_f(x: &Matrix, y: &[usize], n_classes: usize) -> Vec<f64> {
    let n = x.rows();
    let mut counts = vec![0usize; n_classes];
    for &label in y {
        counts[label] += 1;
    }
    let groups = counts.iter().filter(|&&c| c > 0).count();
    (0..x.cols())
        .map(|j| {
            let mut sums = vec![0.0; n_classes];
            let mut total = 0.0;
            for i in 0..n {
                let v = x.get(i, j);
                sums[y[i]] += v;
                total += v;
            }
            let grand = total / n as f64;
            let means: Vec<f64> =
                sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
            let between: f64 = (0..n_classes).map(|c| counts[c] as f64 * (means[c] - grand).powi(2)).sum();
            let within: f64 = (0..n).map(|i| (x.get(i, j) - means[y[i]]).powi(2)).sum();
            let df_between = groups.saturating_sub(1) as f64;
            let df_within = n.saturating_sub(groups) as f64;
            if df_between == 0.0 {
                return 0.0;
            }
            if within <= 1e-12 * between.max(1e-300) || df_within == 0.0 {
                return if between > 0.0 { f64::INFINITY } else { 0.0 };
            }
            (between / df_between) / (within / df_within)
        })
        .collect()
}

/// Keeps the top `percentile`% of columns by ANOVA F score (at least one).
/// Ties are broken towards the lower column index.
#[derive(Debug, Clone)]
pub struct SelectPercentile {
    percentile: f64,
    n_features: usize,
    keep: Vec<usize>,
}

impl SelectPercentile {
    pub fn new(percentile: f64) -> Self {
        Self { percentile, n_features: 0, keep: Vec::new() }
    }

    pub fn kept(&self) -> &[usize] {
        &self.keep
    }
}

impl Transformer for SelectPercentile {
    fn fit(&mut self, data: Labelled<'_>, _ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.n_features = data.x.cols();
        let scores = anova_f(data.x, data.y, data.n_classes);
        let k = ((self.n_features as f64 * self.percentile / 100.0).ceil() as usize).clamp(1, self.n_features);
        let mut order: Vec<usize> = (0..self.n_features).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut keep = order[..k].to_vec();
        keep.sort_unstable();
        self.keep = keep;
        Ok(())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, FitError> {
        check_shape(x, self.n_features)?;
        Ok(x.select_columns(&self.keep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cancel::CancelToken;

    fn fit_transform(t: &mut dyn Transformer, x: &Matrix, y: &[usize], n_classes: usize) -> Result<Matrix, FitError> {
        let cancel = CancelToken::new();
        t.fit(Labelled { x, y, n_classes }, FitContext::new(&cancel, 0))?;
        t.transform(x)
    }

    fn col(values: &[f64]) -> Matrix {
        Matrix::new(values.len(), 1, values.to_vec())
    }

    #[test]
    fn imputer_strategies() {
        let x = col(&[1.0, f64::NAN, 3.0]);
        let y = [0, 1, 0];
        assert_eq!(fit_transform(&mut Imputer::new(ImputeStrategy::Mean), &x, &y, 2).unwrap(), col(&[1.0, 2.0, 3.0]));
        let x = col(&[1.0, f64::NAN, 3.0, 10.0]);
        let y = [0, 1, 0, 1];
        assert_eq!(fit_transform(&mut Imputer::new(ImputeStrategy::Median), &x, &y, 2).unwrap().get(1, 0), 3.0);
        let x = col(&[2.0, 2.0, f64::NAN, 1.0, 1.0, 5.0]);
        let y = [0; 6];
        assert_eq!(fit_transform(&mut Imputer::new(ImputeStrategy::MostFrequent), &x, &y, 1).unwrap().get(2, 0), 1.0);
    }

    #[test]
    fn standard_scaler_two_points() {
        assert_eq!(
            fit_transform(&mut StandardScaler::default(), &col(&[0.0, 2.0]), &[0, 1], 2).unwrap(),
            col(&[-1.0, 1.0])
        );
    }

    #[test]
    fn constant_columns_scale_to_zero() {
        let x = col(&[4.0, 4.0, 4.0]);
        let y = [0, 1, 0];
        for t in [&mut StandardScaler::default() as &mut dyn Transformer, &mut MinMaxScaler::default()] {
            assert_eq!(fit_transform(t, &x, &y, 2).unwrap(), col(&[0.0, 0.0, 0.0]));
        }
        assert_eq!(
            fit_transform(&mut MaxAbsScaler::default(), &col(&[0.0, 0.0]), &[0, 1], 2).unwrap(),
            col(&[0.0, 0.0])
        );
    }

    #[test]
    fn min_max_and_max_abs() {
        let x = col(&[-2.0, 0.0, 2.0]);
        let y = [0, 1, 0];
        assert_eq!(fit_transform(&mut MinMaxScaler::default(), &x, &y, 2).unwrap(), col(&[0.0, 0.5, 1.0]));
        assert_eq!(fit_transform(&mut MaxAbsScaler::default(), &x, &y, 2).unwrap(), col(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn variance_threshold_removing_everything_fails() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [1.0, 5.0], [1.0, 5.0]]);
        let err = fit_transform(&mut VarianceThreshold::new(0.0), &x, &[0, 1, 0], 2).unwrap_err();
        assert!(matches!(err, FitError::Numerical(_)));
    }

    #[test]
    fn variance_threshold_keeps_varying_columns() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [1.0, 6.0], [1.0, 7.0]]);
        let mut vt = VarianceThreshold::new(0.0);
        let out = fit_transform(&mut vt, &x, &[0, 1, 0], 2).unwrap();
        assert_eq!(vt.kept(), &[1]);
        assert_eq!(out.cols(), 1);
    }

    #[test]
    fn select_percentile_prefers_informative_columns() {
        // column 1 equals the label, column 0 is noise-ish
        let x = Matrix::from_rows(&[[0.3, 0.0], [0.1, 0.0], [0.2, 1.0], [0.4, 1.0], [0.25, 0.0], [0.15, 1.0]]);
        let y = [0, 0, 1, 1, 0, 1];
        let mut sp = SelectPercentile::new(50.0);
        let out = fit_transform(&mut sp, &x, &y, 2).unwrap();
        assert_eq!(sp.kept(), &[1]);
        assert_eq!(out.column(0), vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);

        let mut tiny = SelectPercentile::new(1.0);
        fit_transform(&mut tiny, &x, &y, 2).unwrap();
        assert_eq!(tiny.kept().len(), 1);
    }

    #[test]
    fn anova_matches_hand_computation() {
        // groups {1,2,3} and {5,6,7}: between = 3*4 + 3*4 = 24 (df 1), within = 2 + 2 = 4 (df 4)
        let x = col(&[1.0, 2.0, 3.0, 5.0, 6.0, 7.0]);
        let f = anova_f(&x, &[0, 0, 0, 1, 1, 1], 2);
        assert!((f[0] - 24.0).abs() < 1e-12);
    }
}
