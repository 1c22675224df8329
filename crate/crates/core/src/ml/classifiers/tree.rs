use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cancel::CancelToken;
use crate::ml::{check_fit_input, check_shape, Classifier, FitContext, FitError, Labelled, Matrix};

use super::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, counts: &[usize], total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let n = total as f64;
        match self {
            Criterion::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>(),
            Criterion::Entropy => -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    p * p.log2()
                })
                .sum::<f64>(),
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree with binary threshold splits at midpoints
/// between consecutive distinct values.
///
/// A node becomes a leaf when it is pure, reaches `max_depth`, or admits no
/// split leaving at least `min_samples_leaf` rows on each side. The split
/// with the lowest weighted child impurity wins; earlier features and lower
/// thresholds win ties.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    criterion: Criterion,
    max_depth: Option<usize>,
    min_samples_leaf: usize,
    max_features: Option<usize>,
    nodes: Vec<Node>,
    n_features: usize,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    cancel: &'a CancelToken,
    rng: ChaCha8Rng,
}

impl DecisionTree {
    pub fn new(criterion: Criterion, max_depth: Option<usize>, min_samples_leaf: usize) -> Self {
        Self {
            criterion,
            max_depth,
            min_samples_leaf: min_samples_leaf.max(1),
            max_features: None,
            nodes: Vec::new(),
            n_features: 0,
        }
    }

    /// Restricts each split search to a random subset of `m` features, widening
    /// the search only when none of them admits a valid split.
    pub fn with_max_features(mut self, m: usize) -> Self {
        self.max_features = Some(m.max(1));
        self
    }

    pub fn depth(&self) -> usize {
        fn depth(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + depth(nodes, left).max(depth(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            depth(&self.nodes, 0)
        }
    }

    fn fit_rows(
        &mut self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        rows: Vec<usize>,
        ctx: FitContext<'_>,
    ) -> Result<(), FitError> {
        self.nodes.clear();
        self.n_features = x.cols();
        let mut builder = Builder { x, y, n_classes, cancel: ctx.cancel, rng: ChaCha8Rng::seed_from_u64(ctx.seed) };
        self.grow(&mut builder, rows, 0)?;
        Ok(())
    }

    fn grow(&mut self, b: &mut Builder<'_>, rows: Vec<usize>, depth: usize) -> Result<usize, FitError> {
        b.cancel.check()?;
        let mut counts = vec![0usize; b.n_classes];
        for &i in &rows {
            counts[b.y[i]] += 1;
        }
        let majority = argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.max_depth.is_some_and(|m| depth >= m);
        let index = self.nodes.len();
        self.nodes.push(Node::Leaf(majority));
        if pure || depth_reached || rows.len() < 2 * self.min_samples_leaf {
            return Ok(index);
        }
        let Some((feature, threshold)) = self.best_split(b, &rows) else {
            return Ok(index);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| b.x.get(i, feature) <= threshold);
        let left = self.grow(b, left_rows, depth + 1)?;
        let right = self.grow(b, right_rows, depth + 1)?;
        self.nodes[index] = Node::Split { feature, threshold, left, right };
        Ok(index)
    }

    fn best_split(&self, b: &mut Builder<'_>, rows: &[usize]) -> Option<(usize, f64)> {
        let d = b.x.cols();
        let mut features: Vec<usize> = (0..d).collect();
        let budget = match self.max_features {
            Some(m) if m < d => {
                features.shuffle(&mut b.rng);
                m
            }
            _ => d,
        };
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for (inspected, &feature) in features.iter().enumerate() {
            if inspected >= budget && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &c| b.x.get(a, feature).total_cmp(&b.x.get(c, feature)));
            let mut left = vec![0usize; b.n_classes];
            let mut right = vec![0usize; b.n_classes];
            for &i in &sorted {
                right[b.y[i]] += 1;
            }
            for pos in 0..n - 1 {
                let label = b.y[sorted[pos]];
                left[label] += 1;
                right[label] -= 1;
                let here = b.x.get(sorted[pos], feature);
                let next = b.x.get(sorted[pos + 1], feature);
                let n_left = pos + 1;
                if here == next || n_left < self.min_samples_leaf || n - n_left < self.min_samples_leaf {
                    continue;
                }
                let score = (n_left as f64 * self.criterion.impurity(&left, n_left)
                    + (n - n_left) as f64 * self.criterion.impurity(&right, n - n_left))
                    / n as f64;
                if best.is_none_or(|(s, _, _)| score < s - 1e-15) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next {
                        threshold = here;
                    }
                    best = Some((score, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(class) => return class,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

impl Classifier for DecisionTree {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        self.fit_rows(data.x, data.y, data.n_classes, (0..data.x.rows()).collect(), ctx)
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        if self.nodes.is_empty() {
            return Err(FitError::Numerical("decision tree is not fitted".into()));
        }
        check_shape(x, self.n_features)?;
        cancel.check()?;
        Ok(x.iter_rows().map(|row| self.predict_row(row)).collect())
    }
}

/// Bagged decision trees, each grown on a bootstrap sample with
/// `sqrt(n_features)` candidate features per split; majority vote.
#[derive(Debug, Clone)]
pub struct RandomForest {
    criterion: Criterion,
    max_depth: Option<usize>,
    n_estimators: usize,
    min_weight_fraction_leaf: f64,
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn new(
        criterion: Criterion,
        max_depth: Option<usize>,
        n_estimators: usize,
        min_weight_fraction_leaf: f64,
    ) -> Self {
        Self {
            criterion,
            max_depth,
            n_estimators: n_estimators.max(1),
            min_weight_fraction_leaf,
            trees: Vec::new(),
            n_classes: 0,
        }
    }
}

impl Classifier for RandomForest {
    fn fit(&mut self, data: Labelled<'_>, ctx: FitContext<'_>) -> Result<(), FitError> {
        check_fit_input(&data)?;
        let n = data.x.rows();
        let max_features = ((data.x.cols() as f64).sqrt().round() as usize).max(1);
        let min_leaf = ((self.min_weight_fraction_leaf * n as f64).ceil() as usize).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        self.n_classes = data.n_classes;
        self.trees.clear();
        for _ in 0..self.n_estimators {
            ctx.cancel.check()?;
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut tree = DecisionTree::new(self.criterion, self.max_depth, min_leaf).with_max_features(max_features);
            let tree_ctx = FitContext::new(ctx.cancel, rng.random());
            tree.fit_rows(data.x, data.y, data.n_classes, rows, tree_ctx)?;
            self.trees.push(tree);
        }
        Ok(())
    }

    fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, FitError> {
        if self.trees.is_empty() {
            return Err(FitError::Numerical("random forest is not fitted".into()));
        }
        check_shape(x, self.trees[0].n_features)?;
        cancel.check()?;
        Ok(x.iter_rows()
            .map(|row| {
                let mut votes = vec![0.0; self.n_classes];
                for tree in &self.trees {
                    votes[tree.predict_row(row)] += 1.0;
                }
                argmax(&votes)
            })
            .collect())
    }
}
