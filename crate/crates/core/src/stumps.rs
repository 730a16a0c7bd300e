//! Decision-stump weak learner: finds the stump with maximal edge
//! `sum_i u_i y_i h(x_i)` under the current example weights.
//!
//! Candidate thresholds for a feature are the midpoints between consecutive
//! distinct sorted values, plus one sentinel below the minimum and one above
//! the maximum (so both constant hypotheses are representable). Every response
//! column a threshold on that feature can produce is covered by exactly one
//! candidate.
//!
//! Ties are broken by lowest feature index, then lowest threshold, then
//! polarity +1, independently of how many threads scan the features.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::dataset::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};
use crate::hypothesis::{Stump, StumpKey};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub stump: Stump,
    pub edge: f64,
}

/// Threshold strictly between `lo` and `hi` (`lo < hi`) that separates them
/// under the `x >= t` rule.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo / 2.0 + hi / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

fn below(min: f64) -> f64 {
    min - 1.0
}

fn above(max: f64) -> f64 {
    let t = max + 1.0;
    if t > max {
        t
    } else {
        max.next_up()
    }
}

/// Per-feature sort orders, computed once per dataset and reused every round.
#[derive(Debug, Clone)]
pub struct StumpOracle {
    /// For each feature, example indices in ascending feature order.
    order: Vec<Vec<u32>>,
    /// For each feature, the feature values in that order.
    sorted: Vec<Vec<f64>>,
    labels: Vec<i8>,
}

impl StumpOracle {
    pub fn new(dataset: &LabeledDataset) -> Self {
        Self::from_parts(dataset.features(), dataset.labels())
    }

    pub fn from_parts(features: &FeatureMatrix, labels: &[i8]) -> Self {
        let m = features.rows();
        let (order, sorted): (Vec<_>, Vec<_>) = (0..features.dims())
            .into_par_iter()
            .map(|d| {
                let mut idx: Vec<u32> = (0..m as u32).collect();
                idx.sort_by(|&a, &b| {
                    features
                        .get(a as usize, d)
                        .total_cmp(&features.get(b as usize, d))
                        .then(a.cmp(&b))
                });
                let vals = idx.iter().map(|&i| features.get(i as usize, d)).collect();
                (idx, vals)
            })
            .unzip();
        StumpOracle {
            order,
            sorted,
            labels: labels.to_vec(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.order.len()
    }

    fn best_in_feature(
        &self,
        d: usize,
        yu: &[f64],
        total: f64,
        excluded: &HashSet<StumpKey>,
    ) -> Option<WeightedEdge> {
        let order = &self.order[d];
        let vals = &self.sorted[d];
        let m = order.len();
        if m == 0 {
            return None;
        }
        let mut best: Option<WeightedEdge> = None;
        let mut consider = |threshold: f64, below_sum: f64| {
            let plus = total - 2.0 * below_sum;
            for (polarity, edge) in [(1i8, plus), (-1i8, -plus)] {
                let stump = Stump {
                    feature: d,
                    threshold,
                    polarity,
                };
                if !excluded.is_empty() && excluded.contains(&stump.key()) {
                    continue;
                }
                if best.is_none_or(|b| edge > b.edge) {
                    best = Some(WeightedEdge { stump, edge });
                }
            }
        };
        consider(below(vals[0]), 0.0);
        let mut below_sum = 0.0;
        for r in 0..m {
            below_sum += yu[order[r] as usize];
            if r + 1 < m && vals[r + 1] > vals[r] {
                consider(midpoint(vals[r], vals[r + 1]), below_sum);
            }
        }
        consider(above(vals[m - 1]), below_sum);
        best
    }

    /// Stump with maximal edge under weights `u`, skipping `excluded`.
    pub fn best_stump(&self, u: &[f64], excluded: &HashSet<StumpKey>) -> Result<WeightedEdge> {
        if u.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                what: "example weights",
                expected: self.labels.len(),
                got: u.len(),
            });
        }
        if self.labels.is_empty() {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        let yu: Vec<f64> = u
            .iter()
            .zip(&self.labels)
            .map(|(&ui, &y)| ui * f64::from(y))
            .collect();
        let total: f64 = yu.iter().sum();
        let per_feature: Vec<Option<WeightedEdge>> = (0..self.n_features())
            .into_par_iter()
            .map(|d| self.best_in_feature(d, &yu, total, excluded))
            .collect();
        per_feature
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<WeightedEdge>, cand| match acc {
                Some(b) if cand.edge <= b.edge => Some(b),
                _ => Some(cand),
            })
            .ok_or(Error::WeakLearnerExhausted)
    }
}

/// One-shot version of [`StumpOracle::best_stump`].
pub fn best_stump(
    dataset: &LabeledDataset,
    u: &[f64],
    excluded: &HashSet<StumpKey>,
) -> Result<WeightedEdge> {
    if let Some(bad) = u.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "example weight {bad} is not positive"
        )));
    }
    StumpOracle::new(dataset).best_stump(u, excluded)
}

/// Response column of `stump` on every example of `dataset`.
pub fn stump_responses(stump: &Stump, dataset: &LabeledDataset) -> Result<Vec<i8>> {
    stump.responses(dataset.features())
}

/// Every candidate stump (both polarities) the oracle can return on `features`,
/// in tie-breaking order.
pub fn candidate_stumps(features: &FeatureMatrix) -> Vec<Stump> {
    let mut out = Vec::new();
    for d in 0..features.dims() {
        let mut vals: Vec<f64> = (0..features.rows()).map(|i| features.get(i, d)).collect();
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut thresholds = vec![below(vals[0])];
        thresholds.extend(vals.windows(2).map(|w| midpoint(w[0], w[1])));
        thresholds.push(above(vals[vals.len() - 1]));
        for t in thresholds {
            for polarity in [1, -1] {
                out.push(Stump {
                    feature: d,
                    threshold: t,
                    polarity,
                });
            }
        }
    }
    out
}
