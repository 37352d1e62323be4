//! Confusion-matrix accounting and the accuracy / precision / recall / F1
//! scores reported by the experiment harness.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use serde::Serialize;

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub class_order: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// How per-class scores are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Unweighted mean over classes (default; experiments are class-balanced).
    Macro,
    /// Mean weighted by per-class support.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport<F> {
    pub accuracy: F,
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub per_class_precision: Vec<F>,
    pub per_class_recall: Vec<F>,
    pub per_class_f1: Vec<F>,
}

/// Tally predictions against ground truth.
pub fn confusion(
    preds: &[String],
    truth: &[String],
    class_order: &[String],
) -> Result<ConfusionMatrix> {
    if preds.len() != truth.len() {
        return Err(Error::LengthMismatch {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let index = |label: &String| -> Result<usize> {
        class_order
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel {
                id: String::new(),
                label: label.clone(),
            })
    };
    let c = class_order.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (p, t) in preds.iter().zip(truth) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        class_order: class_order.to_vec(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

/// Per-class one-vs-rest precision/recall/F1 plus the aggregate scores.
/// Zero denominators yield 0 by convention.
pub fn scores<F: Scalar>(m: &ConfusionMatrix, averaging: Averaging) -> Result<ScoreReport<F>> {
    let c = m.class_order.len();
    let total = m.total();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut per_p = Vec::with_capacity(c);
    let mut per_r = Vec::with_capacity(c);
    let mut per_f = Vec::with_capacity(c);
    let mut support = Vec::with_capacity(c);
    for i in 0..c {
        let tp = m.counts[i][i] as f64;
        let fp: f64 = (0..c)
            .filter(|&j| j != i)
            .map(|j| m.counts[j][i] as f64)
            .sum();
        let fal_n: f64 = (0..c)
            .filter(|&j| j != i)
            .map(|j| m.counts[i][j] as f64)
            .sum();
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fal_n > 0.0 {
            tp / (tp + fal_n)
        } else {
            0.0
        };
        let f = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        per_p.push(lit::<F>(p));
        per_r.push(lit::<F>(r));
        per_f.push(lit::<F>(f));
        support.push(tp + fal_n);
    }
    let weights: Vec<f64> = match averaging {
        Averaging::Macro => vec![1.0 / c as f64; c],
        Averaging::Weighted => support.iter().map(|&s| s / total as f64).collect(),
    };
    let agg = |v: &[F]| -> F {
        v.iter()
            .zip(&weights)
            .map(|(&x, &w)| x * lit::<F>(w))
            .fold(F::zero(), |s, x| s + x)
    };
    Ok(ScoreReport {
        accuracy: lit::<F>(m.trace() as f64 / total as f64),
        precision: agg(&per_p),
        recall: agg(&per_r),
        f1: agg(&per_f),
        per_class_precision: per_p,
        per_class_recall: per_r,
        per_class_f1: per_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_predictions_are_diagonal() {
        let classes = labels(&["a", "b"]);
        let y = labels(&["a", "b", "a", "b", "a", "a", "b", "b", "a", "b"]);
        let m = confusion(&y, &y, &classes).unwrap();
        assert_eq!(m.trace(), 10);
        assert_eq!(m.total(), 10);
        let s: ScoreReport<f64> = scores(&m, Averaging::Macro).unwrap();
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn symmetric_binary_case() {
        let classes = labels(&["pos", "neg"]);
        let truth = labels(&["pos", "pos", "neg", "neg"]);
        let preds = labels(&["pos", "neg", "pos", "neg"]);
        let m = confusion(&preds, &truth, &classes).unwrap();
        assert_eq!(m.counts, vec![vec![1, 1], vec![1, 1]]);
        let s: ScoreReport<f64> = scores(&m, Averaging::Macro).unwrap();
        assert_eq!(s.accuracy, 0.5);
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 0.5);
        assert_eq!(s.f1, 0.5);
    }

    #[test]
    fn empty_input_errors() {
        let classes = labels(&["a"]);
        assert!(confusion(&[], &[], &classes).is_err());
    }

    #[test]
    fn length_mismatch_errors() {
        let classes = labels(&["a"]);
        let one = labels(&["a"]);
        assert!(confusion(&one, &[], &classes).is_err());
    }

    // Hand-computed oracle fixture for [[5,0,0],[2,3,0],[0,1,4]]:
    //   accuracy = 12/15
    //   precision: a = 5/7, b = 3/4, c = 4/4
    //   recall:    a = 5/5, b = 3/5, c = 4/5
    //   f1:        a = 2*(5/7)/(1+5/7) = 5/6, b = 2*(3/4*3/5)/(3/4+3/5) = 2/3,
    //              c = 2*(1*4/5)/(1+4/5) = 8/9
    #[test]
    fn three_class_hand_fixture() {
        let m = ConfusionMatrix {
            class_order: labels(&["a", "b", "c"]),
            counts: vec![vec![5, 0, 0], vec![2, 3, 0], vec![0, 1, 4]],
        };
        let s: ScoreReport<f64> = scores(&m, Averaging::Macro).unwrap();
        assert_abs_diff_eq!(s.accuracy, 12.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_precision[0], 5.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_precision[1], 3.0 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_precision[2], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_recall[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_recall[1], 3.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_recall[2], 4.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_f1[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_f1[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.per_class_f1[2], 8.0 / 9.0, epsilon = 1e-15);
        let macro_f1 = (5.0 / 6.0 + 2.0 / 3.0 + 8.0 / 9.0) / 3.0;
        assert_abs_diff_eq!(s.f1, macro_f1, epsilon = 1e-15);
    }

    #[test]
    fn permuting_class_order_preserves_macro_scores() {
        let classes = labels(&["a", "b", "c"]);
        let truth = labels(&["a", "a", "b", "b", "c", "c", "a", "c"]);
        let preds = labels(&["a", "b", "b", "c", "c", "a", "a", "c"]);
        let s1: ScoreReport<f64> =
            scores(&confusion(&preds, &truth, &classes).unwrap(), Averaging::Macro).unwrap();
        let permuted = labels(&["c", "a", "b"]);
        let s2: ScoreReport<f64> =
            scores(&confusion(&preds, &truth, &permuted).unwrap(), Averaging::Macro).unwrap();
        assert_abs_diff_eq!(s1.accuracy, s2.accuracy, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.f1, s2.f1, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.per_class_f1[0], s2.per_class_f1[1], epsilon = 1e-15);
    }

    #[test]
    fn accuracy_equals_micro_precision_and_recall() {
        let classes = labels(&["a", "b", "c"]);
        let truth = labels(&["a", "b", "c", "a", "b", "c", "a"]);
        let preds = labels(&["a", "c", "c", "b", "b", "a", "a"]);
        let m = confusion(&preds, &truth, &classes).unwrap();
        // micro precision = micro recall = trace/total for single-label tasks
        let micro = m.trace() as f64 / m.total() as f64;
        let s: ScoreReport<f64> = scores(&m, Averaging::Macro).unwrap();
        assert_abs_diff_eq!(s.accuracy, micro, epsilon = 1e-15);
    }

    #[test]
    fn weighted_averaging_uses_support() {
        let m = ConfusionMatrix {
            class_order: labels(&["a", "b"]),
            counts: vec![vec![9, 1], vec![1, 0]],
        };
        let s: ScoreReport<f64> = scores(&m, Averaging::Weighted).unwrap();
        // recall: a = 0.9 (support 10), b = 0 (support 1)
        assert_abs_diff_eq!(s.recall, 0.9 * 10.0 / 11.0, epsilon = 1e-15);
    }
}
