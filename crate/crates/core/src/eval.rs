//! Metrics and experiment harnesses: ROC curves, rates against the number of
//! weak classifiers, the asymmetry (k) sweep and decision-boundary maps.
//!
//! Rates are always computed from integer counts, e.g. `DR = TP / M1`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boost::{
    fit_offset_scores, train, train_adaboost_baseline, Algorithm, BoostConfig, RateTarget,
    TrainTrace, EFFECTIVE_TOL,
};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypothesis::Ensemble;
use crate::losses::CostConvention;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Threshold or weak-classifier count the point belongs to.
    pub meta: f64,
}

/// Confusion counts of `predict = score >= b` style decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn from_predictions(predictions: &[i8], labels: &[i8]) -> Self {
        let mut c = Counts::default();
        for (&p, &y) in predictions.iter().zip(labels) {
            match (p, y) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    pub fn from_scores(scores: &[f64], labels: &[i8], b: f64) -> Self {
        let p: Vec<i8> = scores
            .iter()
            .map(|&s| if s >= b { 1 } else { -1 })
            .collect();
        Self::from_predictions(&p, labels)
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.fp + self.tn
    }

    pub fn detection_rate(&self) -> f64 {
        self.tp as f64 / self.positives() as f64
    }

    pub fn false_positive_rate(&self) -> f64 {
        self.fp as f64 / self.negatives() as f64
    }

    pub fn false_negative_rate(&self) -> f64 {
        self.fn_ as f64 / self.positives() as f64
    }

    /// Overall error rate.
    pub fn false_rate(&self) -> f64 {
        (self.fp + self.fn_) as f64 / (self.positives() + self.negatives()) as f64
    }
}

fn check_classes(scores: &[f64], labels: &[i8]) -> Result<(usize, usize)> {
    let counts = class_counts(scores, labels)?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    Ok(counts)
}

fn class_counts(scores: &[f64], labels: &[i8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument("both classes are required".into()));
    }
    Ok((pos, neg))
}

/// ROC curve `(FPR, DR)` over all distinct thresholds, from `(0, 0)` (reject
/// everything, `meta = +inf`) to `(1, 1)`. Each later point accepts
/// `score >= meta`. Scores of `-inf` mark examples that are never accepted
/// (rejected by an earlier cascade node); the curve then stops short of `(1, 1)`.
pub fn roc_curve(scores: &[f64], labels: &[i8]) -> Result<Vec<CurvePoint>> {
    let (pos, neg) = class_counts(scores, labels)?;
    if scores.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
        return Err(Error::InvalidArgument("NaN or +inf score".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = vec![CurvePoint {
        x: 0.0,
        y: 0.0,
        meta: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let t = scores[idx[i]];
        if t == f64::NEG_INFINITY {
            break;
        }
        while i < idx.len() && scores[idx[i]] == t {
            if labels[idx[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push(CurvePoint {
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
            meta: t,
        });
    }
    Ok(out)
}

/// Trapezoidal area under a curve sorted by `x`.
pub fn auc(curve: &[CurvePoint]) -> f64 {
    curve
        .windows(2)
        .map(|p| (p[1].x - p[0].x) * (p[1].y + p[0].y) / 2.0)
        .sum()
}

/// Which rate is pinned when sweeping the number of weak classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinnedRate {
    /// Report the detection rate with the false positive rate held at most this value.
    DrAtFpr(f64),
    /// Report the false positive rate with the detection rate held at least this value.
    FprAtDr(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    /// Number of weak classifiers in the prefix.
    pub n: usize,
    /// Reported rate; `None` when the pinned rate can only be met by
    /// rejecting every example.
    pub value: Option<f64>,
    /// Pinned rate actually achieved.
    pub pinned: f64,
    pub offset: f64,
    pub effective: usize,
}

/// Offset pinning `mode` on `(scores, labels)` and the resulting point.
pub fn pinned_point(
    scores: &[f64],
    labels: &[i8],
    mode: PinnedRate,
) -> Result<(f64, Option<f64>, f64)> {
    check_classes(scores, labels)?;
    let target = match mode {
        PinnedRate::DrAtFpr(r) => RateTarget::Fpr(r),
        PinnedRate::FprAtDr(d) => RateTarget::detection_rate(d),
    };
    let b = fit_offset_scores(scores, labels, target)?;
    let c = Counts::from_scores(scores, labels, b);
    Ok(match mode {
        PinnedRate::DrAtFpr(_) => {
            let value = (c.tp + c.fp > 0).then(|| c.detection_rate());
            (b, value, c.false_positive_rate())
        }
        PinnedRate::FprAtDr(_) => (b, Some(c.false_positive_rate()), c.detection_rate()),
    })
}

/// One point per prefix length `n` that appears in `trace`, using the
/// coefficients the prefix had at that round. The offset is fitted on
/// `dataset` itself.
pub fn rate_vs_weakcount(
    ensemble: &Ensemble,
    trace: &TrainTrace,
    dataset: &LabeledDataset,
    mode: PinnedRate,
) -> Result<Vec<RatePoint>> {
    let mut out = Vec::new();
    for n in 1..=ensemble.len() {
        let Some(w) = trace.weights_at(n) else {
            continue;
        };
        let prefix = ensemble.prefix_with(n, w.to_vec())?;
        let scores = prefix.raw_scores(dataset.features());
        let (offset, value, pinned) = pinned_point(&scores, dataset.labels(), mode)?;
        out.push(RatePoint {
            n,
            value,
            pinned,
            offset,
            effective: prefix.effective_count(EFFECTIVE_TOL),
        });
    }
    Ok(out)
}

/// How the k-sweep places the decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// The trained model's own threshold: `sign(F(x))`.
    #[default]
    Zero,
    /// Offset minimising `(FNR + FPR) / 2` on the training data.
    BalancedError,
}

/// Offset minimising the balanced error on `(scores, labels)`; among ties the
/// one closest to zero, then the lowest.
pub fn balanced_error_offset(scores: &[f64], labels: &[i8]) -> Result<f64> {
    let (pos, neg) = check_classes(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // candidate b below everything: accept all
    let lowest = scores[idx[0]];
    let mut best_b = lowest - 1.0;
    let (mut fn_, mut tn) = (0usize, 0usize);
    let balanced =
        |fn_: usize, tn: usize| (fn_ as f64 / pos as f64 + (neg - tn) as f64 / neg as f64) / 2.0;
    let mut best_err = balanced(0, 0);
    let mut i = 0;
    while i < idx.len() {
        let t = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == t {
            if labels[idx[i]] == 1 {
                fn_ += 1;
            } else {
                tn += 1;
            }
            i += 1;
        }
        let b = if i < idx.len() {
            let next = scores[idx[i]];
            let m = t / 2.0 + next / 2.0;
            if m > t {
                m
            } else {
                next
            }
        } else {
            t + 1.0
        };
        let err = balanced(fn_, tn);
        if err < best_err || (err == best_err && b.abs() < best_b.abs()) {
            best_err = err;
            best_b = b;
        }
    }
    Ok(best_b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSweepParams {
    pub grid: Vec<f64>,
    pub theta: f64,
    /// Stump budget per model.
    pub max_weak: usize,
    pub variants: Vec<Algorithm>,
    pub include_adaboost: bool,
    pub threshold: ThresholdRule,
    #[serde(default)]
    pub convention: CostConvention,
}

impl KSweepParams {
    /// `k = 1.2, 1.4, ..., 3.0`, `theta = 0.01`, 100 stumps, both variants.
    pub fn standard() -> Self {
        KSweepParams {
            grid: (0..10).map(|i| (12 + 2 * i) as f64 / 10.0).collect(),
            theta: 0.01,
            max_weak: 100,
            variants: vec![Algorithm::Tc1, Algorithm::Tc2],
            include_adaboost: true,
            threshold: ThresholdRule::Zero,
            convention: CostConvention::PositiveCostlier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweepRow {
    pub algorithm: Algorithm,
    pub k: Option<f64>,
    pub false_rate: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub stumps: usize,
    pub effective: usize,
    pub offset: f64,
}

/// Trained model of one sweep cell, kept for boundary comparisons.
#[derive(Debug, Clone)]
pub struct KSweepCell {
    pub row: KSweepRow,
    pub ensemble: Ensemble,
}

fn sweep_cell(
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    algorithm: Algorithm,
    k: Option<f64>,
    params: &KSweepParams,
) -> Result<KSweepCell> {
    let mut ensemble = match algorithm {
        Algorithm::AdaBoost => train_adaboost_baseline(train_set, params.max_weak)?.0,
        _ => {
            let config = BoostConfig {
                algorithm,
                theta: params.theta,
                k: k.unwrap_or(1.0),
                convention: params.convention,
                max_weak: params.max_weak,
                ..BoostConfig::default()
            };
            train(train_set, &config, None)?.0
        }
    };
    let b = match params.threshold {
        ThresholdRule::Zero => 0.0,
        ThresholdRule::BalancedError => balanced_error_offset(
            &ensemble.raw_scores(train_set.features()),
            train_set.labels(),
        )?,
    };
    ensemble.set_offset(b);
    let predictions: Vec<i8> = (0..test_set.len())
        .map(|i| ensemble.predict(test_set.features().row(i)))
        .collect();
    let c = Counts::from_predictions(&predictions, test_set.labels());
    Ok(KSweepCell {
        row: KSweepRow {
            algorithm,
            k,
            false_rate: c.false_rate(),
            false_positive_rate: c.false_positive_rate(),
            false_negative_rate: c.false_negative_rate(),
            stumps: ensemble.len(),
            effective: ensemble.effective_count(EFFECTIVE_TOL),
            offset: b,
        },
        ensemble,
    })
}

/// One model per (variant, k) plus an optional AdaBoost row (first), trained
/// on `train_set` and evaluated on `test_set`. Cells run in parallel; the
/// output order is fixed: AdaBoost, then each variant over the grid.
pub fn ksweep(
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    params: &KSweepParams,
) -> Result<Vec<KSweepCell>> {
    if params.grid.is_empty() {
        return Err(Error::InvalidArgument("k grid is empty".into()));
    }
    let mut jobs: Vec<(Algorithm, Option<f64>)> = Vec::new();
    if params.include_adaboost {
        jobs.push((Algorithm::AdaBoost, None));
    }
    for &v in &params.variants {
        if v == Algorithm::AdaBoost {
            return Err(Error::InvalidArgument(
                "adaboost is a baseline row, not a sweep variant".into(),
            ));
        }
        jobs.extend(params.grid.iter().map(|&k| (v, Some(k))));
    }
    jobs.par_iter()
        .map(|&(alg, k)| {
            sweep_cell(train_set, test_set, alg, k, params).map_err(|e| Error::GridPoint {
                label: match k {
                    Some(k) => format!("{} k={k}", alg.name()),
                    None => alg.name().to_string(),
                },
                source: Box::new(e),
            })
        })
        .collect()
}

/// Predictions on an `n x n` grid over `[lo, hi]^2`, row-major in `y` then
/// `x`, as `(x, y, prediction)`.
pub fn decision_grid(ensemble: &Ensemble, n: usize, lo: f64, hi: f64) -> Vec<(f64, f64, i8)> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = lo + iy as f64 * step;
        for ix in 0..n {
            let x = lo + ix as f64 * step;
            out.push((x, y, ensemble.predict(&[x, y])));
        }
    }
    out
}

/// Fraction of grid points where two 2-D models disagree.
pub fn disagreement(a: &Ensemble, b: &Ensemble, n: usize, lo: f64, hi: f64) -> f64 {
    let ga = decision_grid(a, n, lo, hi);
    let gb = decision_grid(b, n, lo, hi);
    let diff = ga.iter().zip(&gb).filter(|(p, q)| p.2 != q.2).count();
    diff as f64 / ga.len() as f64
}

/// Experiment output: CSV with a header row, or JSON `{experiment, params, rows}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ExperimentTable {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        ExperimentTable {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(csv_cell).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(r.iter().cloned())
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "params": self.params,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }
}

/// `Value` for an optional number (`null` when absent or non-finite).
pub fn num(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => Value::from(x),
        _ => Value::Null,
    }
}

pub fn ksweep_table(cells: &[KSweepCell], params: &KSweepParams) -> ExperimentTable {
    let mut t = ExperimentTable::new(
        "ksweep",
        &[
            "algorithm",
            "k",
            "fr",
            "fpr",
            "fnr",
            "stumps",
            "effective",
            "offset",
        ],
    )
    .param("grid", params.grid.clone())
    .param("theta", params.theta)
    .param("max_weak", params.max_weak)
    .param(
        "threshold",
        serde_json::to_value(params.threshold).unwrap_or(Value::Null),
    )
    .param(
        "convention",
        serde_json::to_value(params.convention).unwrap_or(Value::Null),
    );
    for c in cells {
        let r = &c.row;
        t.push(vec![
            Value::from(r.algorithm.name()),
            num(r.k),
            Value::from(r.false_rate),
            Value::from(r.false_positive_rate),
            Value::from(r.false_negative_rate),
            Value::from(r.stumps),
            Value::from(r.effective),
            num(Some(r.offset)),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureMatrix;
    use crate::hypothesis::Stump;

    #[test]
    fn roc_separated_passes_corner() {
        let s = [0.9, 0.8, 0.1, 0.2];
        let y = [1, 1, -1, -1];
        let c = roc_curve(&s, &y).unwrap();
        assert!(c.iter().any(|p| p.x == 0.0 && p.y == 1.0));
        assert_eq!(auc(&c), 1.0);
        assert!(c.windows(2).all(|p| p[0].x <= p[1].x));
    }

    #[test]
    fn roc_reversal_and_monotone_invariance() {
        let s: Vec<f64> = (0..50).map(|i| ((i * 31) % 17) as f64).collect();
        let y: Vec<i8> = (0..50)
            .map(|i| if (i * 7) % 3 == 0 { 1 } else { -1 })
            .collect();
        let a = auc(&roc_curve(&s, &y).unwrap());
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let r = auc(&roc_curve(&neg, &y).unwrap());
        assert!((a + r - 1.0).abs() < 1e-12);
        let exp: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let c1 = roc_curve(&s, &y).unwrap();
        let c2 = roc_curve(&exp, &y).unwrap();
        assert!(c1.iter().zip(&c2).all(|(p, q)| p.x == q.x && p.y == q.y));
    }

    #[test]
    fn roc_single_class() {
        assert!(roc_curve(&[1.0, 2.0], &[1, 1]).is_err());
    }

    #[test]
    fn roc_never_accepted_scores() {
        let s = [2.0, f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY];
        let y = [1, 1, -1, -1];
        let c = roc_curve(&s, &y).unwrap();
        let last = c.last().unwrap();
        assert_eq!((last.x, last.y), (0.5, 0.5));
        assert!(roc_curve(&[f64::NAN, 1.0], &[1, -1]).is_err());
    }

    #[test]
    fn balanced_offset_separates() {
        let s = [3.0, 2.0, -1.0, -4.0];
        let y = [1, 1, -1, -1];
        let b = balanced_error_offset(&s, &y).unwrap();
        let c = Counts::from_scores(&s, &y, b);
        assert_eq!((c.fp, c.fn_), (0, 0));
        assert_eq!(b, 0.5);
    }

    #[test]
    fn full_prefix_equals_direct_evaluation() {
        let f = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![-1, 1, -1, 1]).unwrap();
        let e = Ensemble::new(
            vec![
                Stump::new(0, 0.5, 1).unwrap(),
                Stump::new(0, 2.5, 1).unwrap(),
            ],
            vec![0.3, 0.6],
            0.0,
        )
        .unwrap();
        let trace = TrainTrace {
            rounds: vec![],
            stop: None,
        };
        assert!(
            rate_vs_weakcount(&e, &trace, &d, PinnedRate::FprAtDr(0.995))
                .unwrap()
                .is_empty()
        );
        let mut trace = trace;
        for (i, w) in [vec![0.5], vec![0.3, 0.6]].into_iter().enumerate() {
            trace.rounds.push(crate::boost::RoundRecord {
                round: i + 1,
                stump: None,
                edge: None,
                primal: 0.0,
                dual: None,
                gap: None,
                nonzero: w.len(),
                weights: w,
                solver_iterations: 0,
                solver_converged: true,
            });
        }
        let pts = rate_vs_weakcount(&e, &trace, &d, PinnedRate::FprAtDr(0.995)).unwrap();
        assert_eq!(pts.len(), 2);
        let direct = pinned_point(
            &e.raw_scores(d.features()),
            d.labels(),
            PinnedRate::FprAtDr(0.995),
        )
        .unwrap();
        assert_eq!(pts[1].value, direct.1);
        assert_eq!(pts[1].offset, direct.0);
    }

    #[test]
    fn table_outputs() {
        let mut t = ExperimentTable::new("demo", &["a", "b"]).param("p", 1);
        t.push(vec![Value::from(1.5), Value::Null]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, Some("hash")).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# hash\na,b\n1.5,\n");
        let j: Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(j["rows"][0]["a"], Value::from(1.5));
        assert_eq!(j["experiment"], "demo");
    }

    #[test]
    fn grid_shape() {
        let e = Ensemble::new(vec![Stump::new(0, 0.0, 1).unwrap()], vec![1.0], 0.0).unwrap();
        let g = decision_grid(&e, 200, -1.6, 1.6);
        assert_eq!(g.len(), 40000);
        assert_eq!(g[0].0, -1.6);
        assert!((g[199].0 - 1.6).abs() < 1e-12);
        assert_eq!(disagreement(&e, &e, 20, -1.0, 1.0), 0.0);
    }
}
