//! Macro-averaged F1 for activity classification.

use crate::error::{Error, Result};

/// Macro F1 outcome; `absent_classes` lists label values that never appear
/// in the ground truth (they still count as zero towards the mean).
#[derive(Debug, Clone, PartialEq)]
pub struct MacroF1 {
    pub value: f64,
    pub per_class: Vec<f64>,
    pub absent_classes: Vec<usize>,
}

/// Unweighted mean of per-class F1 over a fixed class count.
pub fn macro_f1(pred: &[usize], gt: &[usize], n_classes: usize) -> Result<MacroF1> {
    if pred.len() != gt.len() {
        return Err(Error::Dimension {
            context: "macro_f1",
            expected: gt.len().to_string(),
            got: pred.len().to_string(),
        });
    }
    for &l in pred.iter().chain(gt.iter()) {
        if l >= n_classes {
            return Err(Error::Range {
                field: "class label",
                value: l as f64,
                min: 0.0,
                max: (n_classes - 1) as f64,
            });
        }
    }
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    let mut gt_seen = vec![false; n_classes];
    for (&p, &g) in pred.iter().zip(gt.iter()) {
        gt_seen[g] = true;
        if p == g {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let per_class: Vec<f64> = (0..n_classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .collect();
    let absent_classes: Vec<usize> = (0..n_classes).filter(|&c| !gt_seen[c]).collect();
    let value = per_class.iter().sum::<f64>() / n_classes as f64;
    Ok(MacroF1 { value, per_class, absent_classes })
}
