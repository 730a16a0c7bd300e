//! Node cascades: the classic Viola-Jones chain and the multi-exit variant in
//! which every node re-uses the weak classifiers of the nodes before it.
//!
//! Each node is trained on all positives plus a fixed-size set of negatives.
//! After a node is added, the negatives it rejects are dropped and the set is
//! refilled with false positives of the partial cascade, taken in order from
//! the negative pool.

use std::collections::HashSet;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{
    booster, fit_offset, Algorithm, BoostConfig, RateTarget, Step, StopReason, EFFECTIVE_TOL,
};
use crate::dataset::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};
use crate::hypothesis::Ensemble;
use crate::model::{ModelDocument, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CascadeStructure {
    ViolaJones,
    MultiExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTargets {
    pub min_detection_rate: f64,
    pub max_false_positive_rate: f64,
}

impl Default for NodeTargets {
    fn default() -> Self {
        NodeTargets {
            min_detection_rate: 0.995,
            max_false_positive_rate: 0.5,
        }
    }
}

/// Per-node numbers of new weak classifiers matching the growth of the
/// stage-wise baseline's node sizes at desk scale.
pub const DEFAULT_SCHEDULE: [usize; 6] = [7, 15, 30, 30, 50, 50];

/// Node sizes of the 18-node stage-wise face detector, whose cumulative
/// counts run 7, 22, 52, ..., 2132.
pub const FULL_SCALE_SCHEDULE: [usize; 18] = [
    7, 15, 30, 30, 50, 50, 50, 100, 120, 140, 160, 180, 200, 200, 200, 200, 200, 200,
];

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeConfig {
    pub boost: BoostConfig,
    /// Maximum number of new weak classifiers for each node; its length is
    /// the maximum number of nodes.
    pub schedule: Vec<usize>,
    pub targets: NodeTargets,
    /// Stop adding weak classifiers to a node once its targets hold on the
    /// node's training set.
    pub stop_at_targets: bool,
    pub negatives_per_node: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            boost: BoostConfig::default(),
            schedule: DEFAULT_SCHEDULE.to_vec(),
            targets: NodeTargets::default(),
            stop_at_targets: true,
            negatives_per_node: 500,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        self.boost.validate()?;
        if self.schedule.is_empty() || self.schedule.contains(&0) {
            return Err(Error::InvalidArgument(
                "schedule needs at least one node and positive sizes".into(),
            ));
        }
        let t = self.targets;
        if !(t.min_detection_rate > 0.0 && t.min_detection_rate <= 1.0) {
            return Err(Error::InvalidTarget(format!(
                "detection rate {}",
                t.min_detection_rate
            )));
        }
        if !(0.0..=1.0).contains(&t.max_false_positive_rate) {
            return Err(Error::InvalidTarget(format!(
                "false positive rate {}",
                t.max_false_positive_rate
            )));
        }
        if self.negatives_per_node == 0 {
            return Err(Error::InvalidArgument(
                "negatives_per_node must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeNode {
    pub node_index: usize,
    pub model: ModelDocument,
    /// Index of the node that introduced each stump of `model`.
    pub origin: Vec<usize>,
    pub targets: NodeTargets,
    pub train_detection_rate: f64,
    pub train_false_positive_rate: f64,
    pub train_negatives: usize,
    pub stop: Option<StopReason>,
}

impl CascadeNode {
    pub fn ensemble(&self) -> Result<Ensemble> {
        self.model.ensemble()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeModel {
    pub format_version: u32,
    pub structure: CascadeStructure,
    pub nodes: Vec<CascadeNode>,
    /// Training ended early because the negative pool ran out of false positives.
    #[serde(default)]
    pub bootstrap_exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl CascadeModel {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: CascadeModel = serde_json::from_str(text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported cascade format version {}",
                m.format_version
            )));
        }
        Ok(m)
    }

    fn ensembles(&self) -> Result<Vec<Ensemble>> {
        self.nodes.iter().map(CascadeNode::ensemble).collect()
    }
}

/// Decoded cascade for fast evaluation.
struct Compiled {
    structure: CascadeStructure,
    nodes: Vec<Ensemble>,
}

impl Compiled {
    /// Index of the first node rejecting `row`, or `None` if every node accepts it.
    fn first_rejection(&self, row: &[f64]) -> Option<usize> {
        self.nodes.iter().position(|e| e.score(row) < 0.0)
    }

    /// Effective stumps evaluated by an example that leaves after `node`.
    fn evaluated_stumps(&self, node: usize) -> usize {
        match self.structure {
            CascadeStructure::ViolaJones => self.nodes[..=node]
                .iter()
                .map(|e| e.effective_count(EFFECTIVE_TOL))
                .sum(),
            CascadeStructure::MultiExit => {
                // scores are accumulated over the shared stump list; a stump is
                // computed once if it is effective in any node reached
                let mut seen = HashSet::new();
                for e in &self.nodes[..=node] {
                    for (s, &w) in e.stumps().iter().zip(e.weights()) {
                        if w > EFFECTIVE_TOL {
                            seen.insert(s.key());
                        }
                    }
                }
                seen.len()
            }
        }
    }
}

fn node_set(pos: &FeatureMatrix, neg: &FeatureMatrix) -> Result<LabeledDataset> {
    LabeledDataset::from_classes(pos, neg)
}

fn rates_at(ens: &Ensemble, data: &LabeledDataset) -> (f64, f64) {
    let (mut tp, mut fp) = (0usize, 0usize);
    for i in 0..data.len() {
        if ens.predict(data.features().row(i)) == 1 {
            if data.labels()[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    (
        tp as f64 / data.n_pos() as f64,
        fp as f64 / data.n_neg() as f64,
    )
}

/// Trains one node, returning the ensemble with its offset fitted to the
/// detection-rate target.
fn train_node(
    data: &LabeledDataset,
    config: &CascadeConfig,
    max_weak: usize,
    inherited: Option<&Ensemble>,
) -> Result<(Ensemble, Option<StopReason>)> {
    let boost = BoostConfig {
        max_weak,
        ..config.boost
    };
    let target = RateTarget::detection_rate(config.targets.min_detection_rate);
    let mut trainer = booster(data, &boost, inherited)?;
    let mut stop = None;
    loop {
        match trainer.step()? {
            Step::Stopped(reason) => {
                stop = Some(reason);
                break;
            }
            Step::Added if config.stop_at_targets => {
                let mut e = trainer.ensemble();
                e.set_offset(fit_offset(&e, data, target)?);
                if rates_at(&e, data).1 <= config.targets.max_false_positive_rate {
                    break;
                }
            }
            Step::Added => {}
        }
    }
    let mut e = trainer.ensemble();
    e.set_offset(fit_offset(&e, data, target)?);
    Ok((e, stop))
}

/// Trains a cascade on `positives` with negatives drawn from `neg_pool`.
///
/// Node training stops when the schedule is used up or when the pool cannot
/// supply `negatives_per_node` false positives for the next node; the latter
/// sets `bootstrap_exhausted`.
pub fn train_cascade(
    positives: &FeatureMatrix,
    neg_pool: &FeatureMatrix,
    config: &CascadeConfig,
    structure: CascadeStructure,
) -> Result<CascadeModel> {
    config.validate()?;
    if positives.rows() == 0 {
        return Err(Error::InvalidArgument("no positive examples".into()));
    }
    if positives.dims() != neg_pool.dims() {
        return Err(Error::DimensionMismatch {
            what: "negative pool dimensions",
            expected: positives.dims(),
            got: neg_pool.dims(),
        });
    }
    let want = config.negatives_per_node;
    let mut cursor = 0usize;
    let mut negatives = FeatureMatrix::empty(positives.dims());
    let mut compiled = Compiled {
        structure,
        nodes: Vec::new(),
    };
    let mut nodes = Vec::new();
    let mut exhausted = false;
    let mut previous: Option<(Ensemble, Vec<usize>)> = None;

    for (index, &max_weak) in config.schedule.iter().enumerate() {
        // refill with false positives of the current partial cascade
        while negatives.rows() < want && cursor < neg_pool.rows() {
            let row = neg_pool.row(cursor);
            cursor += 1;
            if compiled.first_rejection(row).is_none() {
                negatives.push_row(row)?;
            }
        }
        if negatives.rows() < want {
            info!(
                "node {index}: only {} of {want} false positives left in the pool",
                negatives.rows()
            );
            exhausted = true;
            break;
        }
        let data = node_set(positives, &negatives)?;
        let inherited = match (structure, &previous) {
            (CascadeStructure::MultiExit, Some((e, _))) => Some(e),
            _ => None,
        };
        let (ensemble, stop) = train_node(&data, config, max_weak, inherited)?;
        let mut origin = match (structure, &previous) {
            (CascadeStructure::MultiExit, Some((_, o))) => o.clone(),
            _ => Vec::new(),
        };
        origin.resize(ensemble.len(), index);
        let (dr, fpr) = rates_at(&ensemble, &data);
        info!(
            "node {index}: {} stumps ({} effective), train DR {dr:.4} FPR {fpr:.4}",
            ensemble.len(),
            ensemble.effective_count(EFFECTIVE_TOL)
        );
        let mut model = ModelDocument::new(
            config.boost.algorithm,
            config.boost.theta,
            config.boost.k,
            &ensemble,
        )
        .with_convention(config.boost.convention);
        model.stop = stop;
        nodes.push(CascadeNode {
            node_index: index,
            model,
            origin: origin.clone(),
            targets: config.targets,
            train_detection_rate: dr,
            train_false_positive_rate: fpr,
            train_negatives: negatives.rows(),
            stop,
        });
        // keep only the negatives this node lets through
        let keep: Vec<usize> = (0..negatives.rows())
            .filter(|&i| ensemble.score(negatives.row(i)) >= 0.0)
            .collect();
        negatives = negatives.select(&keep);
        compiled.nodes.push(ensemble.clone());
        previous = Some((ensemble, origin));
    }
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "negative pool has fewer than {want} examples"
        )));
    }
    Ok(CascadeModel {
        format_version: FORMAT_VERSION,
        structure,
        nodes,
        bootstrap_exhausted: exhausted,
        config_hash: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeEvaluation {
    pub detection_rate: f64,
    pub false_positive_rate: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    /// Examples rejected at each node.
    pub rejections: Vec<usize>,
    /// Mean number of effective stumps computed per example.
    pub mean_stumps_evaluated: f64,
}

/// Runs every example through the cascade with early exit.
pub fn evaluate_cascade(
    model: &CascadeModel,
    dataset: &LabeledDataset,
) -> Result<CascadeEvaluation> {
    if model.nodes.is_empty() {
        return Err(Error::InvalidArgument("cascade has no nodes".into()));
    }
    let compiled = Compiled {
        structure: model.structure,
        nodes: model.ensembles()?,
    };
    let last = compiled.nodes.len() - 1;
    let outcomes: Vec<Option<usize>> = (0..dataset.len())
        .into_par_iter()
        .map(|i| compiled.first_rejection(dataset.features().row(i)))
        .collect();
    let costs: Vec<usize> = (0..=last).map(|n| compiled.evaluated_stumps(n)).collect();
    let mut rejections = vec![0; compiled.nodes.len()];
    let (mut tp, mut fp, mut stumps) = (0usize, 0usize, 0usize);
    for (i, outcome) in outcomes.iter().enumerate() {
        match outcome {
            Some(n) => {
                rejections[*n] += 1;
                stumps += costs[*n];
            }
            None => {
                stumps += costs[last];
                if dataset.labels()[i] == 1 {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
    }
    Ok(CascadeEvaluation {
        detection_rate: tp as f64 / dataset.n_pos() as f64,
        false_positive_rate: fp as f64 / dataset.n_neg() as f64,
        true_positives: tp,
        false_positives: fp,
        rejections,
        mean_stumps_evaluated: stumps as f64 / dataset.len() as f64,
    })
}

/// Final-node score of every example that passes all earlier nodes, and
/// `-inf` for the rest. Sweeping a threshold over these scores traces the
/// cascade's ROC curve with the last node's offset varied.
pub fn cascade_scores(model: &CascadeModel, dataset: &LabeledDataset) -> Result<Vec<f64>> {
    let nodes = model.ensembles()?;
    let Some((last, earlier)) = nodes.split_last() else {
        return Err(Error::InvalidArgument("cascade has no nodes".into()));
    };
    Ok((0..dataset.len())
        .into_par_iter()
        .map(|i| {
            let row = dataset.features().row(i);
            if earlier.iter().any(|e| e.score(row) < 0.0) {
                f64::NEG_INFINITY
            } else {
                last.score(row)
            }
        })
        .collect())
}

/// Entry `[j][i]` (for `i <= j`) is the fraction of stumps introduced at node
/// `i` that keep a coefficient above the effective tolerance in node `j`.
/// Entries above the diagonal, and columns of nodes that introduced no
/// stumps, are `None`.
pub fn effective_stump_table(model: &CascadeModel) -> Result<Vec<Vec<Option<f64>>>> {
    if model.structure != CascadeStructure::MultiExit {
        return Err(Error::UnsupportedStructure(
            "effective-stump ratios need a multi-exit cascade".into(),
        ));
    }
    let n = model.nodes.len();
    let mut table = vec![vec![None; n]; n];
    for (j, node) in model.nodes.iter().enumerate() {
        for (i, cell) in table[j].iter_mut().enumerate().take(j + 1) {
            let (mut total, mut kept) = (0usize, 0usize);
            for (o, &w) in node.origin.iter().zip(&node.model.w) {
                if *o == i {
                    total += 1;
                    if w > EFFECTIVE_TOL {
                        kept += 1;
                    }
                }
            }
            if total > 0 {
                *cell = Some(kept as f64 / total as f64);
            }
        }
    }
    Ok(table)
}

/// Cumulative effective stumps per node: for multi-exit, the effective
/// stumps of node `j`'s ensemble; for Viola-Jones, the sum over nodes `0..=j`.
pub fn cumulative_effective(model: &CascadeModel) -> Vec<usize> {
    let mut out = Vec::with_capacity(model.nodes.len());
    let mut running = 0;
    for node in &model.nodes {
        let eff = node.model.w.iter().filter(|&&w| w > EFFECTIVE_TOL).count();
        match model.structure {
            CascadeStructure::MultiExit => out.push(eff),
            CascadeStructure::ViolaJones => {
                running += eff;
                out.push(running);
            }
        }
    }
    out
}

/// True when each node's stump list extends the previous node's.
pub fn inheritance_holds(model: &CascadeModel) -> bool {
    model.nodes.windows(2).all(|pair| {
        let (a, b) = (&pair[0].model.stumps, &pair[1].model.stumps);
        b.len() >= a.len() && b[..a.len()] == a[..]
    })
}

pub fn algorithm_of(model: &CascadeModel) -> Option<Algorithm> {
    model.nodes.first().map(|n| n.model.variant)
}
