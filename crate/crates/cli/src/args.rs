use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use asymboost::boost::Algorithm;
use asymboost::cascade::CascadeStructure;
use asymboost::eval::ThresholdRule;
use asymboost::losses::{CostConvention, InitRule};

/// Parses a kebab-case enum value through its serde representation.
fn serde_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unknown value {s:?}"))
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| format!("bad list element {p:?}"))
        })
        .collect()
}

// Aliases keep clap from treating the option as repeated scalar values.
type F64List = Vec<f64>;
type UsizeList = Vec<usize>;

fn f64_list(s: &str) -> Result<F64List, String> {
    list(s)
}

fn usize_list(s: &str) -> Result<UsizeList, String> {
    list(s)
}

#[derive(Debug, Parser)]
#[command(
    name = "asymboost",
    version,
    about = "Asymmetric totally-corrective boosting and cascade training"
)]
pub struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic 2-D ring dataset as CSV.
    Gen(GenArgs),
    /// Compute Haar features of the images listed in a manifest.
    Extract(ExtractArgs),
    /// Train a single boosted classifier.
    Train(TrainArgs),
    /// Train a Viola-Jones or multi-exit cascade.
    Cascade(CascadeArgs),
    /// Evaluate a model or cascade on a dataset.
    Eval(EvalArgs),
    /// Sweep the asymmetric factor k and report false rates.
    Ksweep(KsweepArgs),
    /// Sparsity and optimality reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n_pos: Option<usize>,
    #[arg(long)]
    pub n_neg: Option<usize>,
    /// Required: the generator has no implicit seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Manifest JSON `{"images": [{"path": ..., "label": ...}]}`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Detection window as `WIDTHxHEIGHT`; defaults to the image size.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct BoostArgs {
    /// tc1, tc2 or adaboost.
    #[arg(long, value_parser = serde_enum::<Algorithm>)]
    pub variant: Option<Algorithm>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// positive-costlier (k = C1/C2) or negative-costlier (k = C2/C1).
    #[arg(long, value_parser = serde_enum::<CostConvention>)]
    pub convention: Option<CostConvention>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_weak: Option<usize>,
    /// eq8-at-zero or algorithm1-literal.
    #[arg(long, value_parser = serde_enum::<InitRule>)]
    pub init_rule: Option<InitRule>,
    #[arg(long)]
    pub solver_tolerance: Option<f64>,
    #[arg(long)]
    pub solver_max_iterations: Option<usize>,
    #[arg(long)]
    pub solver_memory: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data: CSV, or an image manifest (`.json`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub boost: BoostArgs,
    /// Output directory (default: $ASYMBOOST_OUT_DIR or the current directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Base name of the model and trace files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    /// Positive examples; with `--negatives` omitted, its negative rows
    /// form the bootstrap pool.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Pool of negative examples (rows of any label are used as negatives).
    #[arg(long)]
    pub negatives: Option<PathBuf>,
    /// viola-jones or multi-exit.
    #[arg(long, value_parser = serde_enum::<CascadeStructure>)]
    pub structure: Option<CascadeStructure>,
    /// Comma-separated maximum new weak classifiers per node.
    #[arg(long, value_parser = usize_list)]
    pub schedule: Option<UsizeList>,
    #[arg(long)]
    pub min_detection_rate: Option<f64>,
    #[arg(long)]
    pub max_false_positive_rate: Option<f64>,
    #[arg(long)]
    pub negatives_per_node: Option<usize>,
    /// Train every node to its full schedule size.
    #[arg(long)]
    pub no_stop_at_targets: bool,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Confusion counts and rates at the stored offset.
    Summary,
    Roc,
    DrAtFpr,
    FprAtDr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model or cascade JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// summary, roc, dr-at-fpr or fpr-at-dr.
    #[arg(long, value_parser = serde_enum::<EvalMode>)]
    pub mode: Option<EvalMode>,
    /// Pinned false positive rate for dr-at-fpr.
    #[arg(long)]
    pub fpr: Option<f64>,
    /// Pinned detection rate for fpr-at-dr.
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long, value_parser = serde_enum::<Format>)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KsweepArgs {
    /// Training set; with `--test` omitted it is split 50/50 per class.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Comma-separated k values.
    #[arg(long, value_parser = f64_list)]
    pub grid: Option<F64List>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_weak: Option<usize>,
    #[arg(long, value_parser = serde_enum::<CostConvention>)]
    pub convention: Option<CostConvention>,
    /// zero or balanced-error.
    #[arg(long, value_parser = serde_enum::<ThresholdRule>)]
    pub threshold: Option<ThresholdRule>,
    #[arg(long, value_parser = serde_enum::<Format>)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write TC1/TC2/AdaBoost decision maps at the largest k (2-D data).
    #[arg(long)]
    pub boundary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table {
    /// Ratio of each node's stumps still effective in later nodes.
    EffectiveStumps,
    /// Cumulative effective weak classifiers per node.
    CumulativeEffective,
    /// Edge, coefficient and slack of every stump of a model.
    Kkt,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// effective-stumps, cumulative-effective or kkt.
    #[arg(long, value_parser = serde_enum::<Table>)]
    pub table: Option<Table>,
    /// Cascade JSON (effective-stumps, cumulative-effective).
    #[arg(long)]
    pub cascade: Option<PathBuf>,
    /// Model JSON (kkt).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Training data the model was fitted on (kkt).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_parser = serde_enum::<Format>)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
