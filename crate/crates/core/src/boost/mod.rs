//! Training drivers: totally-corrective column generation for the two
//! asymmetric losses, the stage-wise AdaBoost baseline, KKT reporting and
//! offset fitting.

mod adaboost;
mod column_generation;
mod kkt;
mod offset;

use serde::{Deserialize, Serialize};

pub use adaboost::{train_adaboost_baseline, AdaBoostTrainer};
pub use column_generation::ColumnGeneration;
pub use kkt::{kkt_report, verify_kkt, KktEntry, KktViolation};
pub use offset::{fit_offset, fit_offset_scores, RateTarget};

use crate::boxsolver::SolverSettings;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, Stump};
use crate::losses::{CostConvention, InitRule, Variant};

/// Coefficients above this count as non-zero ("effective") weak classifiers.
pub const EFFECTIVE_TOL: f64 = 1e-8;

/// Absolute tolerance on edges for the complementary-slackness checks.
pub const KKT_EDGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tc1,
    Tc2,
    #[serde(rename = "adaboost")]
    AdaBoost,
}

impl Algorithm {
    pub fn variant(self) -> Option<Variant> {
        match self {
            Algorithm::Tc1 => Some(Variant::Tc1),
            Algorithm::Tc2 => Some(Variant::Tc2),
            Algorithm::AdaBoost => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tc1 => "tc1",
            Algorithm::Tc2 => "tc2",
            Algorithm::AdaBoost => "adaboost",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tc1" => Ok(Algorithm::Tc1),
            "tc2" => Ok(Algorithm::Tc2),
            "adaboost" | "ada" => Ok(Algorithm::AdaBoost),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub algorithm: Algorithm,
    /// l1 regularisation weight.
    pub theta: f64,
    /// Asymmetric cost factor.
    pub k: f64,
    pub convention: CostConvention,
    /// Termination tolerance on the entering edge.
    pub epsilon: f64,
    /// Maximum number of weak classifiers added by this run.
    pub max_weak: usize,
    pub init_rule: InitRule,
    pub solver: SolverSettings,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            algorithm: Algorithm::Tc1,
            theta: 0.01,
            k: 1.0,
            convention: CostConvention::PositiveCostlier,
            epsilon: 1e-6,
            max_weak: 100,
            init_rule: InitRule::Eq8AtZero,
            solver: SolverSettings {
                tolerance: 1e-9,
                max_iterations: 2000,
                memory_size: 10,
            },
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("theta", self.theta)?;
        positive("k", self.k)?;
        positive("epsilon", self.epsilon)?;
        positive("solver tolerance", self.solver.tolerance)?;
        if self.max_weak == 0 {
            return Err(Error::InvalidArgument("max_weak must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why a training run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The best new edge did not exceed `theta + epsilon`.
    EdgeBelowThreshold,
    MaxWeak,
    /// Every candidate stump is already in the master problem.
    PoolExhausted,
    /// The entering column duplicates one already in the master problem.
    Duplicate,
    /// Stage-wise baseline: best weighted error reached 1/2.
    NoProgress,
}

/// Outcome of one training round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Added,
    Stopped(StopReason),
}

/// One training round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 0 for the initial solve over an inherited pool.
    pub round: usize,
    pub stump: Option<Stump>,
    pub edge: Option<f64>,
    pub primal: f64,
    pub dual: Option<f64>,
    pub gap: Option<f64>,
    pub nonzero: usize,
    /// Coefficients of every stump in the model after this round.
    pub weights: Vec<f64>,
    pub solver_iterations: usize,
    pub solver_converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub rounds: Vec<RoundRecord>,
    pub stop: Option<StopReason>,
}

impl TrainTrace {
    /// Coefficients of the first `n` stumps as they were when the model had
    /// exactly `n` stumps, if such a round exists.
    pub fn weights_at(&self, n: usize) -> Option<&[f64]> {
        self.rounds
            .iter()
            .rev()
            .find(|r| r.weights.len() == n)
            .map(|r| r.weights.as_slice())
    }
}

/// Incremental trainer interface shared by both algorithms.
pub trait Booster {
    fn step(&mut self) -> Result<Step>;
    fn ensemble(&self) -> Ensemble;
    fn trace(&self) -> &TrainTrace;
    fn stop_reason(&self) -> Option<StopReason>;

    fn run(&mut self) -> Result<()> {
        while let Step::Added = self.step()? {}
        Ok(())
    }
}

/// Builds the trainer for `config.algorithm`, starting from `initial`
/// (inherited stumps and their coefficients) when given.
pub fn booster<'a>(
    dataset: &'a LabeledDataset,
    config: &BoostConfig,
    initial: Option<&Ensemble>,
) -> Result<Box<dyn Booster + 'a>> {
    Ok(match config.algorithm {
        Algorithm::AdaBoost => Box::new(AdaBoostTrainer::new(dataset, config.max_weak, initial)?),
        Algorithm::Tc1 | Algorithm::Tc2 => {
            Box::new(ColumnGeneration::new(dataset, config, initial)?)
        }
    })
}

/// Trains a model; `initial_pool` stumps enter the master problem before the
/// first round (multi-exit inheritance).
pub fn train(
    dataset: &LabeledDataset,
    config: &BoostConfig,
    initial_pool: Option<&[Stump]>,
) -> Result<(Ensemble, TrainTrace)> {
    let initial = match initial_pool {
        Some(pool) if !pool.is_empty() => {
            Some(Ensemble::new(pool.to_vec(), vec![0.0; pool.len()], 0.0)?)
        }
        _ => None,
    };
    let mut b = booster(dataset, config, initial.as_ref())?;
    b.run()?;
    Ok((b.ensemble(), b.trace().clone()))
}
