use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FoldError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("cannot split {n} instances into {k} folds")]
    TooManyFolds { k: usize, n: usize },
    #[error("holdout fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("holdout split leaves an empty partition")]
    EmptyPartition,
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Rows assigned to `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    /// Rows outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

fn by_class(labels: &[usize]) -> Vec<Vec<usize>> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups
}

/// Stratified k-fold plan: each class is shuffled and dealt round-robin, with
/// the dealing position carried over from one class to the next so overall
/// fold sizes differ by at most one.
pub fn stratified_folds<R: Rng + ?Sized>(labels: &[usize], k: usize, rng: &mut R) -> Result<FoldPlan, FoldError> {
    if k < 2 {
        return Err(FoldError::TooFewFolds(k));
    }
    if k > labels.len() {
        return Err(FoldError::TooManyFolds { k, n: labels.len() });
    }
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for mut group in by_class(labels) {
        group.shuffle(rng);
        for i in group {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}

/// Stratified train/test split holding out about `fraction` of every class,
/// leaving at least one instance of each class in training.
pub fn stratified_holdout<R: Rng + ?Sized>(
    labels: &[usize],
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>), FoldError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(FoldError::BadFraction(fraction));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in by_class(labels) {
        if group.is_empty() {
            continue;
        }
        group.shuffle(rng);
        let n_test = ((group.len() as f64 * fraction).round() as usize).min(group.len() - 1);
        test.extend_from_slice(&group[..n_test]);
        train.extend_from_slice(&group[n_test..]);
    }
    if test.is_empty() || train.is_empty() {
        return Err(FoldError::EmptyPartition);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn per_fold_class_counts(plan: &FoldPlan, labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; n_classes]; plan.k()];
        for (i, &f) in plan.assignments().iter().enumerate() {
            counts[f][labels[i]] += 1;
        }
        counts
    }

    #[test]
    fn balanced_binary_five_folds() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let plan = stratified_folds(&labels, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for counts in per_fold_class_counts(&plan, &labels, 2) {
            assert_eq!(counts, vec![1, 1]);
        }
    }

    #[test]
    fn leave_one_out() {
        let labels = [0, 0, 1, 1, 1];
        let plan = stratified_folds(&labels, 5, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(plan.fold_sizes(), vec![1; 5]);
    }

    #[test]
    fn nine_and_three_into_three_folds() {
        let mut labels = vec![0; 9];
        labels.extend([1; 3]);
        for seed in 0..20 {
            let plan = stratified_folds(&labels, 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for counts in per_fold_class_counts(&plan, &labels, 2) {
                assert_eq!(counts, vec![3, 1]);
            }
        }
    }

    #[test]
    fn rejects_bad_k() {
        let labels = [0, 1, 0];
        assert_eq!(
            stratified_folds(&labels, 4, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(FoldError::TooManyFolds { k: 4, n: 3 })
        );
        assert_eq!(stratified_folds(&labels, 1, &mut ChaCha8Rng::seed_from_u64(0)), Err(FoldError::TooFewFolds(1)));
    }

    #[test]
    fn holdout_is_a_partition() {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let (train, test) = stratified_holdout(&labels, 0.25, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(train.len() + test.len(), 40);
        assert!(train.iter().all(|i| !test.contains(i)));
        assert_eq!(test.len(), 10);
    }
}
