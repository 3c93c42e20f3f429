use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts with rows = predicted class, columns = actual class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Items whose actual class is `c`.
    pub fn column_total(&self, c: usize) -> u64 {
        self.counts.iter().map(|row| row[c]).sum()
    }

    /// Items predicted as `c`.
    pub fn row_total(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    /// Rows = actual, columns = predicted.
    pub fn transposed(&self) -> Vec<Vec<u64>> {
        (0..self.classes).map(|a| (0..self.classes).map(|p| self.counts[p][a]).collect()).collect()
    }
}

pub fn confusion(predictions: &[usize], actuals: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: actuals.len() });
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&p, &a) in predictions.iter().zip(actuals) {
        for l in [p, a] {
            if l >= classes {
                return Err(Error::InvalidLabel { label: l, classes });
            }
        }
        counts[p][a] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

/// Column-stochastic view of a confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedConfusion {
    /// Rows = predicted, columns = actual; each non-empty column sums to 1.
    pub values: Vec<Vec<f64>>,
    /// Actual classes with no items; their columns are all zero.
    pub empty_columns: Vec<usize>,
}

pub fn normalize_columns(cm: &ConfusionMatrix) -> NormalizedConfusion {
    let mut values = vec![vec![0.0; cm.classes]; cm.classes];
    let mut empty_columns = Vec::new();
    for a in 0..cm.classes {
        let total = cm.column_total(a);
        if total == 0 {
            empty_columns.push(a);
            continue;
        }
        for (p, row) in values.iter_mut().enumerate() {
            row[a] = cm.counts[p][a] as f64 / total as f64;
        }
    }
    NormalizedConfusion { values, empty_columns }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Never predicted: precision is 0/0, reported as 0.
    pub precision_undefined: bool,
    /// Never present: recall is 0/0, reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classes: Vec<ClassScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn class_report(cm: &ConfusionMatrix) -> ClassReport {
    let classes: Vec<ClassScores> = (0..cm.classes)
        .map(|c| {
            let tp = cm.counts[c][c];
            let (precision, precision_undefined) = ratio(tp, cm.row_total(c));
            let (recall, recall_undefined) = ratio(tp, cm.column_total(c));
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            ClassScores { precision, recall, f1, support: cm.column_total(c), precision_undefined, recall_undefined }
        })
        .collect();
    let n = cm.classes.max(1) as f64;
    let mean = |f: fn(&ClassScores) -> f64| classes.iter().map(f).sum::<f64>() / n;
    let diagonal: u64 = (0..cm.classes).map(|c| cm.counts[c][c]).sum();
    ClassReport {
        macro_precision: mean(|s| s.precision),
        macro_recall: mean(|s| s.recall),
        macro_f1: mean(|s| s.f1),
        accuracy: ratio(diagonal, cm.total()).0,
        classes,
    }
}

/// Fraction of items whose actual class is among the first `k` ranked
/// predictions.
pub fn topk_accuracy(ranked: &[Vec<usize>], actuals: &[usize], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if ranked.len() != actuals.len() {
        return Err(Error::LengthMismatch { left: ranked.len(), right: actuals.len() });
    }
    if actuals.is_empty() {
        return Ok(0.0);
    }
    let hits = ranked.iter().zip(actuals).filter(|(r, a)| r.iter().take(k).any(|p| p == *a)).count();
    Ok(hits as f64 / actuals.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_normalize_to_identity() {
        let cm = confusion(&[0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap();
        let n = normalize_columns(&cm);
        for (i, row) in n.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(n.empty_columns.is_empty());
    }

    #[test]
    fn constant_predictor_fills_row_zero() {
        let cm = confusion(&[0, 0, 0], &[0, 1, 2], 4).unwrap();
        let n = normalize_columns(&cm);
        assert_eq!(n.values[0], vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(n.empty_columns, vec![3]);
        let r = class_report(&cm);
        assert!(r.classes[1].precision_undefined && r.classes[1].recall == 0.0);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert_eq!(confusion(&[0], &[0, 1], 2).unwrap_err(), Error::LengthMismatch { left: 1, right: 2 });
        assert!(confusion(&[2], &[0], 2).is_err());
    }
}
