use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Value};

use asymboost::boost::{kkt_report, train, verify_kkt, Algorithm, EFFECTIVE_TOL, KKT_EDGE_TOL};
use asymboost::cascade::{
    cascade_scores, cumulative_effective, effective_stump_table, evaluate_cascade, train_cascade,
    CascadeConfig, CascadeModel, CascadeStructure, NodeTargets, DEFAULT_SCHEDULE,
};
use asymboost::data::{
    extract_haar, generate_ring, haar_features, load_csv, load_csv_raw, load_manifest, write_csv,
    GrayImage, RingSpec,
};
use asymboost::eval::{
    auc, decision_grid, disagreement, ksweep, ksweep_table, num, rate_vs_weakcount, roc_curve,
    Counts, ExperimentTable, KSweepParams, PinnedRate,
};
use asymboost::losses::{AsymmetryParams, TrainState};
use asymboost::model::{write_trace_csv, ModelDocument};
use asymboost::{FeatureMatrix, LabeledDataset};

use crate::args::{
    CascadeArgs, EvalArgs, EvalMode, ExtractArgs, Format, GenArgs, KsweepArgs, ReportArgs, Table,
    TrainArgs,
};
use crate::config::{boost_json, bytes_digest, config_hash, dataset_digest, RunConfig};
use crate::error::CliError;
use crate::output::{default_out_dir, Outputs};

const BOUNDARY_GRID: usize = 200;
const BOUNDARY_RANGE: (f64, f64) = (-1.6, 1.6);

fn is_manifest(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn parse_window(spec: Option<&str>, images: &[GrayImage]) -> Result<(usize, usize), CliError> {
    match spec {
        Some(s) => {
            let (w, h) = s
                .split_once(['x', 'X'])
                .ok_or_else(|| CliError::Usage(format!("window {s:?} is not WIDTHxHEIGHT")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("window {s:?} is not WIDTHxHEIGHT")))
            };
            Ok((parse(w)?, parse(h)?))
        }
        None => images
            .first()
            .map(|i| (i.width(), i.height()))
            .ok_or_else(|| CliError::Usage("manifest lists no images".into())),
    }
}

/// CSV dataset, or Haar features of a manifest's images over their full size.
fn load_dataset(path: &Path, window: Option<&str>) -> Result<LabeledDataset, CliError> {
    if is_manifest(path) {
        load_dataset_manifest(path, window)
    } else {
        load_csv(path).map_err(|e| CliError::input(path, e))
    }
}

/// Feature rows of a file regardless of their labels.
fn load_features(path: &Path, window: Option<&str>) -> Result<FeatureMatrix, CliError> {
    if is_manifest(path) {
        let (images, _) = load_manifest(path).map_err(|e| CliError::input(path, e))?;
        let window = parse_window(window, &images)?;
        haar_features(&images, window).map_err(|e| CliError::input(path, e))
    } else {
        Ok(load_csv_raw(path)
            .map_err(|e| CliError::input(path, e))?
            .features)
    }
}

fn features_digest(f: &FeatureMatrix) -> String {
    let mut bytes = Vec::with_capacity(f.rows() * f.dims() * 8 + 16);
    bytes.extend((f.rows() as u64).to_le_bytes());
    bytes.extend((f.dims() as u64).to_le_bytes());
    for i in 0..f.rows() {
        for v in f.row(i) {
            bytes.extend(v.to_bits().to_le_bytes());
        }
    }
    bytes_digest(&bytes)
}

fn required<T: Clone>(flag: Option<T>, config: &Option<T>, name: &str) -> Result<T, CliError> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| CliError::missing(name))
}

fn csv_with_hash(
    hash: &str,
    body: impl FnOnce(&mut Vec<u8>) -> asymboost::Result<()>,
) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# config_hash={hash}\n").into_bytes();
    body(&mut out)?;
    Ok(out)
}

fn render_table(table: &ExperimentTable, format: Format, hash: &str) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => csv_with_hash(hash, |out| table.write_csv(out, None)),
        Format::Json => Ok(table
            .clone()
            .param("config_hash", hash)
            .to_json()?
            .into_bytes()),
    }
}

/// Explicit output file, or `<stem>.csv`/`<stem>.json` in the output
/// directory. The format follows `--format`, then the file extension, then CSV.
fn table_target(
    flag: Option<PathBuf>,
    format: Option<Format>,
    cfg: &RunConfig,
    stem: &str,
) -> (PathBuf, Format) {
    let format = format.or(cfg.format);
    match flag.or_else(|| cfg.out.clone()) {
        Some(path) => {
            let format = format.unwrap_or_else(|| {
                if path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("json"))
                {
                    Format::Json
                } else {
                    Format::Csv
                }
            });
            (path, format)
        }
        None => {
            let format = format.unwrap_or(Format::Csv);
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            let dir = default_out_dir(None, cfg.out_dir.as_deref());
            (dir.join(format!("{stem}.{ext}")), format)
        }
    }
}

pub fn gen(args: GenArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let seed = required(args.seed, &cfg.seed, "seed")?;
    let n_pos = args.n_pos.or(cfg.n_pos).unwrap_or(1000);
    let n_neg = args.n_neg.or(cfg.n_neg).unwrap_or(1000);
    let spec = RingSpec::new(n_pos, n_neg, seed);
    let data = generate_ring(&spec)?;
    let hash = config_hash(
        "gen",
        json!({
            "n_pos": n_pos,
            "n_neg": n_neg,
            "seed": seed,
            "pos_cov_scale": spec.pos_cov_scale,
            "ring_radius_mean": spec.ring_radius_mean,
            "ring_radius_std": spec.ring_radius_std,
        }),
        json!({}),
    );
    let bytes = csv_with_hash(&hash, |out| write_csv(out, data.features(), data.labels()))?;
    let path = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| default_out_dir(None, cfg.out_dir.as_deref()).join("ring.csv"));
    info!(
        "{} examples ({n_pos} positive, {n_neg} negative)",
        data.len()
    );
    let mut out = Outputs::default();
    out.add(path, bytes);
    Ok(out)
}

pub fn extract(args: ExtractArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let manifest = required(args.manifest, &cfg.manifest, "manifest")?;
    let window = args.window.or_else(|| cfg.window.clone());
    let data = load_dataset_manifest(&manifest, window.as_deref())?;
    let hash = config_hash(
        "extract",
        json!({ "window": window }),
        json!({ "data": dataset_digest(&data) }),
    );
    let bytes = csv_with_hash(&hash, |out| write_csv(out, data.features(), data.labels()))?;
    let path = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| default_out_dir(None, cfg.out_dir.as_deref()).join("haar.csv"));
    info!("{} images, {} features each", data.len(), data.dims());
    let mut out = Outputs::default();
    out.add(path, bytes);
    Ok(out)
}

fn load_dataset_manifest(path: &Path, window: Option<&str>) -> Result<LabeledDataset, CliError> {
    let (images, labels) = load_manifest(path).map_err(|e| CliError::input(path, e))?;
    let window = parse_window(window, &images)?;
    extract_haar(&images, &labels, window).map_err(|e| CliError::input(path, e))
}

pub fn train_cmd(args: TrainArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let data_path = required(args.data, &cfg.data, "data")?;
    let config = cfg.boost(&args.boost);
    config.validate()?;
    let data = load_dataset(&data_path, cfg.window.as_deref())?;
    let (ensemble, trace) = train(&data, &config, None)?;
    if trace.rounds.iter().any(|r| !r.solver_converged) {
        warn!("some restricted primal solves stopped at the iteration cap");
    }
    info!(
        "{} stumps ({} effective), stop: {:?}",
        ensemble.len(),
        ensemble.effective_count(EFFECTIVE_TOL),
        trace.stop
    );
    let hash = config_hash(
        "train",
        boost_json(&config),
        json!({ "data": dataset_digest(&data) }),
    );
    let mut doc = ModelDocument::new(config.algorithm, config.theta, config.k, &ensemble)
        .with_convention(config.convention)
        .with_trace(&trace);
    doc.config_hash = Some(hash.clone());
    let dir = default_out_dir(args.out_dir.as_deref(), cfg.out_dir.as_deref());
    let name = args
        .name
        .or_else(|| cfg.name.clone())
        .unwrap_or_else(|| "model".into());
    let mut out = Outputs::default();
    out.add(
        dir.join(format!("{name}.json")),
        doc.to_json()?.into_bytes(),
    );
    out.add(
        dir.join(format!("{name}.trace.csv")),
        csv_with_hash(&hash, |o| write_trace_csv(o, &trace))?,
    );
    Ok(out)
}

pub fn cascade_cmd(args: CascadeArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let data_path = required(args.data, &cfg.data, "data")?;
    let boost = cfg.boost(&args.boost);
    let defaults = CascadeConfig::default();
    let config = CascadeConfig {
        boost,
        schedule: args
            .schedule
            .or_else(|| cfg.schedule.clone())
            .unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec()),
        targets: NodeTargets {
            min_detection_rate: args
                .min_detection_rate
                .or(cfg.min_detection_rate)
                .unwrap_or(defaults.targets.min_detection_rate),
            max_false_positive_rate: args
                .max_false_positive_rate
                .or(cfg.max_false_positive_rate)
                .unwrap_or(defaults.targets.max_false_positive_rate),
        },
        stop_at_targets: !args.no_stop_at_targets
            && cfg.stop_at_targets.unwrap_or(defaults.stop_at_targets),
        negatives_per_node: args
            .negatives_per_node
            .or(cfg.negatives_per_node)
            .unwrap_or(defaults.negatives_per_node),
    };
    config.validate()?;
    let structure = args
        .structure
        .or(cfg.structure)
        .unwrap_or(CascadeStructure::MultiExit);
    let data = load_dataset(&data_path, cfg.window.as_deref())?;
    let positives = data.class_rows(1);
    let pool = match args.negatives.or_else(|| cfg.negatives.clone()) {
        Some(p) => load_features(&p, cfg.window.as_deref())?,
        None => data.class_rows(-1),
    };
    let mut model = train_cascade(&positives, &pool, &config, structure)?;
    if model.bootstrap_exhausted {
        warn!("negative pool exhausted after {} nodes", model.nodes.len());
    }
    info!(
        "{} nodes, cumulative effective stumps {:?}",
        model.nodes.len(),
        cumulative_effective(&model)
    );
    let mut params = boost_json(&config.boost);
    let obj = params.as_object_mut().expect("object");
    obj.insert("structure".into(), json!(structure));
    obj.insert("schedule".into(), json!(config.schedule));
    obj.insert("targets".into(), json!(config.targets));
    obj.insert("stop_at_targets".into(), json!(config.stop_at_targets));
    obj.insert(
        "negatives_per_node".into(),
        json!(config.negatives_per_node),
    );
    let hash = config_hash(
        "cascade",
        params,
        json!({
            "data": dataset_digest(&data),
            "negatives": features_digest(&pool),
        }),
    );
    model.config_hash = Some(hash);
    let dir = default_out_dir(args.out_dir.as_deref(), cfg.out_dir.as_deref());
    let name = args
        .name
        .or_else(|| cfg.name.clone())
        .unwrap_or_else(|| "cascade".into());
    let mut out = Outputs::default();
    out.add(
        dir.join(format!("{name}.json")),
        model.to_json()?.into_bytes(),
    );
    Ok(out)
}

enum Loaded {
    Single(ModelDocument),
    Cascade(CascadeModel),
}

fn load_model(path: &Path) -> Result<(Loaded, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(path, e.into()))?;
    let text = String::from_utf8_lossy(&bytes);
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::input(path, e.into()))?;
    let loaded = if value.get("nodes").is_some() {
        Loaded::Cascade(CascadeModel::from_json(&text).map_err(|e| CliError::input(path, e))?)
    } else {
        Loaded::Single(ModelDocument::from_json(&text).map_err(|e| CliError::input(path, e))?)
    };
    Ok((loaded, bytes))
}

fn roc_table(scores: &[f64], labels: &[i8]) -> Result<ExperimentTable, CliError> {
    let curve = roc_curve(scores, labels)?;
    let mut t = ExperimentTable::new("roc", &["fpr", "dr", "threshold"]).param("auc", auc(&curve));
    for p in &curve {
        t.push(vec![json!(p.x), json!(p.y), num(Some(p.meta))]);
    }
    Ok(t)
}

fn counts_table(c: &Counts) -> ExperimentTable {
    let mut t = ExperimentTable::new(
        "summary",
        &["tp", "fp", "tn", "fn", "dr", "fpr", "fnr", "fr"],
    );
    t.push(vec![
        json!(c.tp),
        json!(c.fp),
        json!(c.tn),
        json!(c.fn_),
        json!(c.detection_rate()),
        json!(c.false_positive_rate()),
        json!(c.false_negative_rate()),
        json!(c.false_rate()),
    ]);
    t
}

pub fn eval(args: EvalArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let model_path = required(args.model, &cfg.model, "model")?;
    let data_path = required(args.data, &cfg.data, "data")?;
    let mode = args.mode.or(cfg.mode).unwrap_or(EvalMode::Summary);
    let fpr = args.fpr.or(cfg.fpr).unwrap_or(0.25);
    let dr = args.dr.or(cfg.dr).unwrap_or(0.995);
    let (model, model_bytes) = load_model(&model_path)?;
    let data = load_dataset(&data_path, cfg.window.as_deref())?;
    let pinned = match mode {
        EvalMode::DrAtFpr => Some(PinnedRate::DrAtFpr(fpr)),
        EvalMode::FprAtDr => Some(PinnedRate::FprAtDr(dr)),
        _ => None,
    };
    let table = match (&model, mode) {
        (Loaded::Single(doc), EvalMode::Summary) => {
            let e = doc.ensemble()?;
            let predictions: Vec<i8> = (0..data.len())
                .map(|i| e.predict(data.features().row(i)))
                .collect();
            counts_table(&Counts::from_predictions(&predictions, data.labels()))
        }
        (Loaded::Single(doc), EvalMode::Roc) => {
            roc_table(&doc.ensemble()?.raw_scores(data.features()), data.labels())?
        }
        (Loaded::Single(doc), _) => {
            let e = doc.ensemble()?;
            let trace = doc.trace().ok_or_else(|| {
                CliError::Usage("model has no training history for per-count rates".into())
            })?;
            let mode = pinned.expect("pinned mode");
            let points = rate_vs_weakcount(&e, &trace, &data, mode)?;
            let (value, fixed) = match mode {
                PinnedRate::DrAtFpr(_) => ("dr", "fpr"),
                PinnedRate::FprAtDr(_) => ("fpr", "dr"),
            };
            let mut t = ExperimentTable::new(
                "rate-vs-weakcount",
                &["n", value, fixed, "offset", "effective"],
            );
            t = match mode {
                PinnedRate::DrAtFpr(r) => t.param("fpr", r),
                PinnedRate::FprAtDr(d) => t.param("dr", d),
            };
            for p in points {
                t.push(vec![
                    json!(p.n),
                    num(p.value),
                    json!(p.pinned),
                    num(Some(p.offset)),
                    json!(p.effective),
                ]);
            }
            t
        }
        (Loaded::Cascade(m), EvalMode::Summary) => {
            let r = evaluate_cascade(m, &data)?;
            let mut t = ExperimentTable::new(
                "cascade-summary",
                &["nodes", "dr", "fpr", "tp", "fp", "mean_stumps_evaluated"],
            )
            .param("rejections", r.rejections.clone());
            t.push(vec![
                json!(m.nodes.len()),
                json!(r.detection_rate),
                json!(r.false_positive_rate),
                json!(r.true_positives),
                json!(r.false_positives),
                json!(r.mean_stumps_evaluated),
            ]);
            t
        }
        (Loaded::Cascade(m), EvalMode::Roc) => {
            roc_table(&cascade_scores(m, &data)?, data.labels())?
        }
        (Loaded::Cascade(_), _) => {
            return Err(CliError::Usage(
                "per-count rate sweeps need a single model, not a cascade".into(),
            ))
        }
    };
    let hash = config_hash(
        "eval",
        json!({ "mode": mode, "fpr": fpr, "dr": dr }),
        json!({
            "model": bytes_digest(&model_bytes),
            "data": dataset_digest(&data),
        }),
    );
    let default_name = match mode {
        EvalMode::Summary => "eval-summary",
        EvalMode::Roc => "eval-roc",
        EvalMode::DrAtFpr => "eval-dr-at-fpr",
        EvalMode::FprAtDr => "eval-fpr-at-dr",
    };
    let (path, format) = table_target(args.out, args.format, cfg, default_name);
    let mut out = Outputs::default();
    out.add(path, render_table(&table, format, &hash)?);
    Ok(out)
}

pub fn ksweep_cmd(args: KsweepArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let data_path = required(args.data, &cfg.data, "data")?;
    let mut params = KSweepParams::standard();
    if let Some(g) = args.grid.or_else(|| cfg.grid.clone()) {
        params.grid = g;
    }
    params.theta = args.theta.or(cfg.theta).unwrap_or(params.theta);
    params.max_weak = args.max_weak.or(cfg.max_weak).unwrap_or(params.max_weak);
    params.convention = args
        .convention
        .or(cfg.convention)
        .unwrap_or(params.convention);
    params.threshold = args.threshold.or(cfg.threshold).unwrap_or(params.threshold);
    if params.grid.iter().any(|k| !(k.is_finite() && *k > 0.0)) || params.grid.is_empty() {
        return Err(CliError::Usage("k grid needs positive values".into()));
    }
    let data = load_dataset(&data_path, cfg.window.as_deref())?;
    let (train_set, test_set) = match args.test.or_else(|| cfg.test.clone()) {
        Some(p) => (data, load_dataset(&p, cfg.window.as_deref())?),
        None => data.split_per_class(0.5)?,
    };
    let cells = ksweep(&train_set, &test_set, &params)?;
    let hash = config_hash(
        "ksweep",
        serde_json::to_value(&params).expect("serialisable"),
        json!({
            "train": dataset_digest(&train_set),
            "test": dataset_digest(&test_set),
        }),
    );
    let mut table = ksweep_table(&cells, &params);
    let mut out = Outputs::default();

    let boundary = args.boundary.or_else(|| cfg.boundary.clone());
    let k_max = params
        .grid
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let at = |alg: Algorithm, k: Option<f64>| {
        cells
            .iter()
            .find(|c| c.row.algorithm == alg && c.row.k == k)
            .map(|c| &c.ensemble)
    };
    for &k in &params.grid {
        if let (Some(a), Some(b)) = (at(Algorithm::Tc1, Some(k)), at(Algorithm::Tc2, Some(k))) {
            if train_set.dims() == 2 {
                let d = disagreement(a, b, BOUNDARY_GRID, BOUNDARY_RANGE.0, BOUNDARY_RANGE.1);
                info!(
                    "k = {k}: TC1/TC2 decision maps disagree on {:.2}%",
                    100.0 * d
                );
                if k == k_max {
                    table = table.param("tc1_tc2_disagreement", d);
                }
            }
        }
    }
    if let Some(path) = boundary {
        if train_set.dims() != 2 {
            return Err(CliError::Usage(
                "decision maps need two-dimensional data".into(),
            ));
        }
        let models = [
            ("adaboost", at(Algorithm::AdaBoost, None)),
            ("tc1", at(Algorithm::Tc1, Some(k_max))),
            ("tc2", at(Algorithm::Tc2, Some(k_max))),
        ];
        let present: Vec<_> = models
            .iter()
            .filter_map(|(n, m)| m.map(|m| (*n, m)))
            .collect();
        let grids: Vec<_> = present
            .iter()
            .map(|(_, m)| decision_grid(m, BOUNDARY_GRID, BOUNDARY_RANGE.0, BOUNDARY_RANGE.1))
            .collect();
        let mut columns = vec!["x", "y"];
        columns.extend(present.iter().map(|(n, _)| *n));
        let mut t = ExperimentTable::new("decision-boundary", &columns).param("k", k_max);
        for i in 0..BOUNDARY_GRID * BOUNDARY_GRID {
            let (x, y, _) = grids[0][i];
            let mut row = vec![json!(x), json!(y)];
            row.extend(grids.iter().map(|g| json!(g[i].2)));
            t.push(row);
        }
        let format = args.format.or(cfg.format).unwrap_or(Format::Csv);
        out.add(path, render_table(&t, format, &hash)?);
    }
    let (path, format) = table_target(args.out, args.format, cfg, "ksweep");
    out.add(path, render_table(&table, format, &hash)?);
    Ok(out)
}

pub fn report(args: ReportArgs, cfg: &RunConfig) -> Result<Outputs, CliError> {
    let table_kind = required(args.table, &cfg.table, "table")?;
    let (table, hash, default_name) = match table_kind {
        Table::EffectiveStumps | Table::CumulativeEffective => {
            let path = required(args.cascade, &cfg.cascade, "cascade")?;
            let (loaded, bytes) = load_model(&path)?;
            let Loaded::Cascade(model) = loaded else {
                return Err(CliError::Usage(format!(
                    "{} is a single model, not a cascade",
                    path.display()
                )));
            };
            let hash = config_hash(
                "report",
                json!({ "table": table_kind }),
                json!({ "cascade": bytes_digest(&bytes) }),
            );
            if table_kind == Table::EffectiveStumps {
                let ratios = effective_stump_table(&model)?;
                let names: Vec<String> = (1..=ratios.len()).map(|i| i.to_string()).collect();
                let mut columns = vec!["node"];
                columns.extend(names.iter().map(String::as_str));
                let mut t = ExperimentTable::new("effective-stumps", &columns);
                for (j, row) in ratios.iter().enumerate() {
                    let mut r = vec![json!(j + 1)];
                    r.extend(row.iter().map(|v| num(*v)));
                    t.push(r);
                }
                (t, hash, "effective-stumps")
            } else {
                let effective = cumulative_effective(&model);
                let mut t =
                    ExperimentTable::new("cumulative-effective", &["node", "stumps", "effective"])
                        .param("structure", json!(model.structure));
                let mut total = 0;
                for (j, node) in model.nodes.iter().enumerate() {
                    let stumps = match model.structure {
                        CascadeStructure::MultiExit => node.model.stumps.len(),
                        CascadeStructure::ViolaJones => {
                            total += node.model.stumps.len();
                            total
                        }
                    };
                    t.push(vec![json!(j + 1), json!(stumps), json!(effective[j])]);
                }
                (t, hash, "cumulative-effective")
            }
        }
        Table::Kkt => {
            let model_path = required(args.model, &cfg.model, "model")?;
            let data_path = required(args.data, &cfg.data, "data")?;
            let (loaded, bytes) = load_model(&model_path)?;
            let Loaded::Single(doc) = loaded else {
                return Err(CliError::Usage("kkt reports need a single model".into()));
            };
            let (Some(variant), Some(theta), Some(k)) = (doc.variant.variant(), doc.theta, doc.k)
            else {
                return Err(CliError::Usage(
                    "kkt reports need a TC1 or TC2 model".into(),
                ));
            };
            let data = load_dataset(&data_path, cfg.window.as_deref())?;
            let ensemble = doc.ensemble()?;
            let asym = AsymmetryParams::with_convention(k, doc.convention.unwrap_or_default())?;
            let mut state =
                TrainState::initial_with(&data, variant, theta, asym, Default::default())?;
            let raw = ensemble.raw_scores(data.features());
            let z = raw
                .iter()
                .zip(data.labels())
                .map(|(s, &y)| s * f64::from(y))
                .collect();
            state.set_margins(z);
            let entries = kkt_report(&ensemble, &data, &state)?;
            let violations = verify_kkt(&entries, KKT_EDGE_TOL, EFFECTIVE_TOL);
            if !violations.is_empty() {
                warn!("{} KKT violations: {violations:?}", violations.len());
            }
            let mut t = ExperimentTable::new(
                "kkt",
                &[
                    "index",
                    "feature",
                    "threshold",
                    "polarity",
                    "weight",
                    "edge",
                    "slack",
                ],
            )
            .param("theta", theta)
            .param("violations", violations.len());
            for (j, e) in entries.iter().enumerate() {
                t.push(vec![
                    json!(j),
                    json!(e.stump.feature),
                    json!(e.stump.threshold),
                    json!(e.stump.polarity),
                    json!(e.weight),
                    json!(e.edge),
                    json!(e.slack),
                ]);
            }
            let hash = config_hash(
                "report",
                json!({ "table": table_kind }),
                json!({ "model": bytes_digest(&bytes), "data": dataset_digest(&data) }),
            );
            (t, hash, "kkt")
        }
    };
    let (path, format) = table_target(args.out, args.format, cfg, default_name);
    let mut out = Outputs::default();
    out.add(path, render_table(&table, format, &hash)?);
    Ok(out)
}
