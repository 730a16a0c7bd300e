use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, Stump};
use crate::losses::TrainState;

/// Optimality data of one master-problem column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktEntry {
    pub stump: Stump,
    /// `sum_i u_i y_i h(x_i)` under the state's weights.
    pub edge: f64,
    pub weight: f64,
    /// `theta - edge`, the multiplier of the `w_j >= 0` constraint.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KktViolation {
    /// Dual infeasible: the column's edge exceeds theta.
    EdgeAboveTheta { index: usize, edge: f64 },
    /// Complementary slackness broken: non-zero coefficient with slack away from zero.
    NonzeroWithSlack {
        index: usize,
        weight: f64,
        slack: f64,
    },
}

/// Edge, coefficient and slack of every stump in `ensemble`.
pub fn kkt_report(
    ensemble: &Ensemble,
    dataset: &LabeledDataset,
    state: &TrainState,
) -> Result<Vec<KktEntry>> {
    if state.u.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            what: "state weights",
            expected: dataset.len(),
            got: state.u.len(),
        });
    }
    ensemble
        .stumps()
        .iter()
        .zip(ensemble.weights())
        .map(|(s, &w)| {
            let col = s.responses(dataset.features())?;
            let edge: f64 = col
                .iter()
                .zip(&state.u)
                .zip(dataset.labels())
                .map(|((&h, &u), &y)| u * f64::from(h * y))
                .sum();
            Ok(KktEntry {
                stump: *s,
                edge,
                weight: w,
                slack: state.theta - edge,
            })
        })
        .collect()
}

/// Checks dual feasibility (`edge <= theta + edge_tol`) and complementary
/// slackness (`w > weight_tol` implies `|edge - theta| <= edge_tol`).
pub fn verify_kkt(entries: &[KktEntry], edge_tol: f64, weight_tol: f64) -> Vec<KktViolation> {
    let mut out = Vec::new();
    for (index, e) in entries.iter().enumerate() {
        if e.slack < -edge_tol {
            out.push(KktViolation::EdgeAboveTheta {
                index,
                edge: e.edge,
            });
        }
        if e.weight > weight_tol && e.slack.abs() > edge_tol {
            out.push(KktViolation::NonzeroWithSlack {
                index,
                weight: e.weight,
                slack: e.slack,
            });
        }
    }
    out
}
