/// `matrix[truth][predicted]` counts.
pub fn confusion_matrix(truth: &[usize], predicted: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    assert_eq!(truth.len(), predicted.len(), "label vectors differ in length");
    let mut matrix = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        matrix[t][p] += 1;
    }
    matrix
}

/// Per-class F1 scores. Precision or recall with a zero denominator count as
/// 0, and F1 is 0 when precision + recall is 0.
pub fn per_class_f_measure(truth: &[usize], predicted: &[usize], n_classes: usize) -> Vec<f64> {
    assert_eq!(truth.len(), predicted.len(), "label vectors differ in length");
    let mut tp = vec![0usize; n_classes];
    let mut predicted_count = vec![0usize; n_classes];
    let mut actual_count = vec![0usize; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        actual_count[t] += 1;
        predicted_count[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    (0..n_classes)
        .map(|c| {
            let precision = if predicted_count[c] == 0 { 0.0 } else { tp[c] as f64 / predicted_count[c] as f64 };
            let recall = if actual_count[c] == 0 { 0.0 } else { tp[c] as f64 / actual_count[c] as f64 };
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect()
}

/// Macro-averaged F-measure: the unweighted mean of per-class F1 over all
/// `n_classes` classes.
pub fn f_measure(truth: &[usize], predicted: &[usize], n_classes: usize) -> f64 {
    if n_classes == 0 {
        return 0.0;
    }
    per_class_f_measure(truth, predicted, n_classes).iter().sum::<f64>() / n_classes as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 2, 1, 0];
        assert_eq!(f_measure(&y, &y, 3), 1.0);
    }

    #[test]
    fn half_right_binary() {
        let per = per_class_f_measure(&[1, 1, 0, 0], &[1, 0, 1, 0], 2);
        assert_eq!(per, vec![0.5, 0.5]);
        assert_eq!(f_measure(&[1, 1, 0, 0], &[1, 0, 1, 0], 2), 0.5);
    }

    #[test]
    fn absent_class_contributes_zero() {
        let y = [0, 1, 0, 1];
        assert_eq!(per_class_f_measure(&y, &y, 3), vec![1.0, 1.0, 0.0]);
        assert!((f_measure(&y, &y, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn confusion() {
        assert_eq!(confusion_matrix(&[0, 1, 1], &[0, 0, 1], 2), vec![vec![1, 0], vec![1, 1]]);
    }
}
