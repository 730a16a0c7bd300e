use std::collections::HashSet;

use log::{debug, warn};

use super::{BoostConfig, Booster, RoundRecord, Step, StopReason, TrainTrace, EFFECTIVE_TOL};
use crate::boxsolver::{minimize, SolveRequest};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, ResponseMatrix, Stump, StumpKey};
use crate::losses::{dual_value, AsymmetryParams, PrimalObjective, TrainState};
use crate::stumps::StumpOracle;

/// Totally-corrective boosting by column generation.
///
/// Each round asks the stump oracle for the column with the largest edge under
/// the current dual weights `u`, adds it to the restricted master problem, and
/// re-solves the restricted primal over all selected columns, warm-started from
/// the previous coefficients extended by zero.
pub struct ColumnGeneration<'a> {
    dataset: &'a LabeledDataset,
    config: BoostConfig,
    oracle: StumpOracle,
    state: TrainState,
    objective: PrimalObjective,
    stumps: Vec<Stump>,
    keys: HashSet<StumpKey>,
    w: Vec<f64>,
    iteration: usize,
    trace: TrainTrace,
}

impl<'a> ColumnGeneration<'a> {
    /// Starts a run. Stumps of `initial` enter the master problem right away,
    /// with their coefficients used as the solver's starting point.
    pub fn new(
        dataset: &'a LabeledDataset,
        config: &BoostConfig,
        initial: Option<&Ensemble>,
    ) -> Result<Self> {
        config.validate()?;
        let variant = config.algorithm.variant().ok_or_else(|| {
            Error::InvalidArgument("column generation needs a TC1 or TC2 variant".into())
        })?;
        let asym = AsymmetryParams::with_convention(config.k, config.convention)?;
        let state =
            TrainState::initial_with(dataset, variant, config.theta, asym, config.init_rule)?;
        let objective = PrimalObjective::for_state(&state, &ResponseMatrix::new(dataset.len()))?;
        let mut cg = ColumnGeneration {
            dataset,
            config: *config,
            oracle: StumpOracle::new(dataset),
            state,
            objective,
            stumps: Vec::new(),
            keys: HashSet::new(),
            w: Vec::new(),
            iteration: 0,
            trace: TrainTrace::default(),
        };
        if let Some(init) = initial.filter(|e| !e.is_empty()) {
            for (s, &wj) in init.stumps().iter().zip(init.weights()) {
                let column = s.responses(dataset.features())?;
                cg.objective.push_column(&column)?;
                cg.keys.insert(s.key());
                cg.stumps.push(*s);
                cg.w.push(wj);
            }
            cg.solve(0, None, None)?;
        }
        Ok(cg)
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn objective(&self) -> &PrimalObjective {
        &self.objective
    }

    pub fn stumps(&self) -> &[Stump] {
        &self.stumps
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn dataset(&self) -> &LabeledDataset {
        self.dataset
    }

    fn solve(&mut self, round: usize, stump: Option<Stump>, edge: Option<f64>) -> Result<()> {
        let req = SolveRequest::nonnegative(&self.objective, self.w.clone())
            .with_settings(self.config.solver);
        let res = minimize(&req).map_err(|e| Error::TrainingSolver {
            round,
            source: Box::new(e),
        })?;
        if !res.converged {
            warn!(
                "round {round}: restricted primal not converged after {} iterations (projected gradient {:.3e})",
                res.iterations, res.projected_gradient_norm
            );
        }
        self.w = res.solution;
        let z = self.objective.margins(&self.w)?;
        self.state.set_margins(z);
        let dual = dual_value(&self.state, &self.state.u)?;
        let record = RoundRecord {
            round,
            stump,
            edge,
            primal: res.value,
            dual: Some(dual),
            gap: Some(res.value - dual),
            nonzero: self.w.iter().filter(|&&v| v > EFFECTIVE_TOL).count(),
            weights: self.w.clone(),
            solver_iterations: res.iterations,
            solver_converged: res.converged,
        };
        debug!(
            "round {round}: primal {:.10} dual {:.10} nnz {}",
            record.primal, dual, record.nonzero
        );
        self.trace.rounds.push(record);
        Ok(())
    }

    fn stop(&mut self, reason: StopReason) -> Step {
        self.trace.stop = Some(reason);
        Step::Stopped(reason)
    }
}

impl Booster for ColumnGeneration<'_> {
    fn step(&mut self) -> Result<Step> {
        if let Some(reason) = self.trace.stop {
            return Ok(Step::Stopped(reason));
        }
        if self.iteration >= self.config.max_weak {
            return Ok(self.stop(StopReason::MaxWeak));
        }
        self.iteration += 1;
        let best = match self.oracle.best_stump(&self.state.u, &self.keys) {
            Ok(b) => b,
            Err(Error::WeakLearnerExhausted) => return Ok(self.stop(StopReason::PoolExhausted)),
            Err(e) => return Err(e),
        };
        // the termination test is skipped only while the master problem is empty
        if !self.stumps.is_empty() && best.edge <= self.config.theta + self.config.epsilon {
            return Ok(self.stop(StopReason::EdgeBelowThreshold));
        }
        if !self.keys.insert(best.stump.key()) {
            return Ok(self.stop(StopReason::Duplicate));
        }
        let column = best.stump.responses(self.dataset.features())?;
        self.objective.push_column(&column)?;
        self.stumps.push(best.stump);
        self.w.push(0.0);
        self.solve(self.iteration, Some(best.stump), Some(best.edge))?;
        Ok(Step::Added)
    }

    fn ensemble(&self) -> Ensemble {
        Ensemble::new(self.stumps.clone(), self.w.clone(), 0.0)
            .expect("solver iterates are feasible")
    }

    fn trace(&self) -> &TrainTrace {
        &self.trace
    }

    fn stop_reason(&self) -> Option<StopReason> {
        self.trace.stop
    }
}
