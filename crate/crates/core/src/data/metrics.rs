use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Mode {
    /// F1 of the given positive class.
    Binary { positive: usize },
    /// Unweighted mean of per-class F1 over the classes present in `y_true`.
    Macro,
}

fn class_f1(y_true: &[usize], y_pred: &[usize], class: usize) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    2.0 * precision * recall / (precision + recall)
}

pub fn f1_score(y_true: &[usize], y_pred: &[usize], mode: F1Mode) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return invalid(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        ));
    }
    if y_true.is_empty() {
        return invalid("F1 needs at least one sample");
    }
    Ok(match mode {
        F1Mode::Binary { positive } => class_f1(y_true, y_pred, positive),
        F1Mode::Macro => {
            let classes: BTreeSet<usize> = y_true.iter().copied().collect();
            classes
                .iter()
                .map(|&c| class_f1(y_true, y_pred, c))
                .sum::<f64>()
                / classes.len() as f64
        }
    })
}
