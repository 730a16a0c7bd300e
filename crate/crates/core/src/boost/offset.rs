use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::Ensemble;

/// Rate the offset must achieve on the data it is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateTarget {
    /// Maximum false negative rate.
    Fnr(f64),
    /// Maximum false positive rate.
    Fpr(f64),
}

impl RateTarget {
    /// Target expressed as a minimum detection rate.
    pub fn detection_rate(dr: f64) -> Self {
        RateTarget::Fnr(1.0 - dr)
    }
}

/// Number of errors allowed among `n` examples at rate `r`.
fn allowance(r: f64, n: usize) -> usize {
    ((r * n as f64) + 1e-9).floor() as usize
}

fn gap_point(lo: f64, hi: f64) -> f64 {
    let m = lo / 2.0 + hi / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

/// Offset `b` (examples with `score >= b` are positive) meeting `target` on
/// `(scores, labels)` while making the fewest errors on the opposite class.
/// `b` lies halfway between consecutive distinct scores, or one unit outside
/// the score range when every example is accepted or rejected.
pub fn fit_offset_scores(scores: &[f64], labels: &[i8], target: RateTarget) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: scores.len(),
            got: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    let mut all: Vec<f64> = scores.to_vec();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let class = |c: i8| -> Vec<f64> {
        scores
            .iter()
            .zip(labels)
            .filter(|(_, &y)| y == c)
            .map(|(&s, _)| s)
            .collect()
    };
    let (lowest, highest) = match (all.first(), all.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::InvalidTarget("no scores".into())),
    };
    match target {
        RateTarget::Fnr(r) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidTarget(format!("false negative rate {r}")));
            }
            let mut pos = class(1);
            if pos.is_empty() {
                return Err(Error::InvalidTarget("no positive examples".into()));
            }
            pos.sort_by(f64::total_cmp);
            let allowed = allowance(r, pos.len());
            if allowed >= pos.len() {
                return Ok(highest + 1.0);
            }
            // largest b with at most `allowed` positives strictly below it
            let pivot = pos[allowed];
            let idx = all.partition_point(|&s| s < pivot);
            Ok(if idx == 0 {
                lowest - 1.0
            } else {
                gap_point(all[idx - 1], pivot)
            })
        }
        RateTarget::Fpr(r) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidTarget(format!("false positive rate {r}")));
            }
            let mut neg = class(-1);
            if neg.is_empty() {
                return Err(Error::InvalidTarget("no negative examples".into()));
            }
            neg.sort_by(|a, b| b.total_cmp(a));
            let allowed = allowance(r, neg.len());
            if allowed >= neg.len() {
                return Ok(lowest - 1.0);
            }
            // smallest b with at most `allowed` negatives at or above it
            let pivot = neg[allowed];
            let idx = all.partition_point(|&s| s <= pivot);
            Ok(if idx == all.len() {
                highest + 1.0
            } else {
                gap_point(pivot, all[idx])
            })
        }
    }
}

/// Fits the ensemble's offset on `dataset`; see [`fit_offset_scores`].
pub fn fit_offset(
    ensemble: &Ensemble,
    dataset: &LabeledDataset,
    target: RateTarget,
) -> Result<f64> {
    let scores = ensemble.raw_scores(dataset.features());
    fit_offset_scores(&scores, dataset.labels(), target)
}
