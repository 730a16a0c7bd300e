use super::{Booster, RoundRecord, Step, StopReason, TrainTrace, EFFECTIVE_TOL};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, Stump};
use crate::stumps::StumpOracle;
use std::collections::HashSet;

const MIN_ERROR: f64 = 1e-12;

/// Stage-wise discrete AdaBoost over decision stumps.
///
/// When started from an existing ensemble (multi-exit inheritance) the
/// inherited coefficients stay fixed and the example distribution starts at
/// `exp(-y F(x))`, normalised.
pub struct AdaBoostTrainer<'a> {
    dataset: &'a LabeledDataset,
    oracle: StumpOracle,
    dist: Vec<f64>,
    /// `y_i F(x_i)` for the current ensemble.
    margins: Vec<f64>,
    stumps: Vec<Stump>,
    alphas: Vec<f64>,
    rounds: usize,
    max_rounds: usize,
    trace: TrainTrace,
}

impl<'a> AdaBoostTrainer<'a> {
    pub fn new(
        dataset: &'a LabeledDataset,
        max_rounds: usize,
        initial: Option<&Ensemble>,
    ) -> Result<Self> {
        if max_rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        let (stumps, alphas) = match initial {
            Some(e) => (e.stumps().to_vec(), e.weights().to_vec()),
            None => (Vec::new(), Vec::new()),
        };
        let mut margins = vec![0.0; dataset.len()];
        for (s, &a) in stumps.iter().zip(&alphas) {
            let col = s.responses(dataset.features())?;
            for (i, m) in margins.iter_mut().enumerate() {
                *m += a * f64::from(col[i] * dataset.labels()[i]);
            }
        }
        let mut t = AdaBoostTrainer {
            dataset,
            oracle: StumpOracle::new(dataset),
            dist: Vec::new(),
            margins,
            stumps,
            alphas,
            rounds: 0,
            max_rounds,
            trace: TrainTrace::default(),
        };
        t.reset_distribution();
        Ok(t)
    }

    fn reset_distribution(&mut self) {
        // shift by the smallest margin so the largest weight is exp(0)
        let min = self.margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = self.margins.iter().map(|m| (-(m - min)).exp()).collect();
        let total: f64 = raw.iter().sum();
        self.dist = raw.into_iter().map(|v| v / total).collect();
    }

    pub fn distribution(&self) -> &[f64] {
        &self.dist
    }

    fn exp_loss(&self) -> f64 {
        self.margins.iter().map(|m| (-m).exp()).sum::<f64>() / self.margins.len() as f64
    }
}

impl Booster for AdaBoostTrainer<'_> {
    fn step(&mut self) -> Result<Step> {
        if let Some(reason) = self.trace.stop {
            return Ok(Step::Stopped(reason));
        }
        if self.rounds >= self.max_rounds {
            self.trace.stop = Some(StopReason::MaxWeak);
            return Ok(Step::Stopped(StopReason::MaxWeak));
        }
        let best = self.oracle.best_stump(&self.dist, &HashSet::new())?;
        let err = (1.0 - best.edge) / 2.0;
        if err >= 0.5 - 1e-12 {
            self.trace.stop = Some(StopReason::NoProgress);
            return Ok(Step::Stopped(StopReason::NoProgress));
        }
        self.rounds += 1;
        let err = err.max(MIN_ERROR);
        let alpha = 0.5 * ((1.0 - err) / err).ln();
        let col = best.stump.responses(self.dataset.features())?;
        for (i, m) in self.margins.iter_mut().enumerate() {
            *m += alpha * f64::from(col[i] * self.dataset.labels()[i]);
        }
        self.reset_distribution();
        self.stumps.push(best.stump);
        self.alphas.push(alpha);
        self.trace.rounds.push(RoundRecord {
            round: self.rounds,
            stump: Some(best.stump),
            edge: Some(best.edge),
            primal: self.exp_loss(),
            dual: None,
            gap: None,
            nonzero: self.alphas.iter().filter(|&&a| a > EFFECTIVE_TOL).count(),
            weights: self.alphas.clone(),
            solver_iterations: 0,
            solver_converged: true,
        });
        Ok(Step::Added)
    }

    fn ensemble(&self) -> Ensemble {
        Ensemble::new(self.stumps.clone(), self.alphas.clone(), 0.0)
            .expect("AdaBoost coefficients are non-negative")
    }

    fn trace(&self) -> &TrainTrace {
        &self.trace
    }

    fn stop_reason(&self) -> Option<StopReason> {
        self.trace.stop
    }
}

/// Stage-wise AdaBoost for at most `rounds` rounds.
pub fn train_adaboost_baseline(
    dataset: &LabeledDataset,
    rounds: usize,
) -> Result<(Ensemble, TrainTrace)> {
    let mut t = AdaBoostTrainer::new(dataset, rounds, None)?;
    t.run()?;
    Ok((t.ensemble(), t.trace.clone()))
}
