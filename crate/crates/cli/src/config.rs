//! JSON run configuration. Every key mirrors a command-line flag (with `_`
//! for `-`); flags take precedence. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use asymboost::boost::{Algorithm, BoostConfig};
use asymboost::boxsolver::SolverSettings;
use asymboost::cascade::CascadeStructure;
use asymboost::eval::ThresholdRule;
use asymboost::losses::{CostConvention, InitRule};
use asymboost::LabeledDataset;

use crate::args::{BoostArgs, EvalMode, Format, Table};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub threads: Option<usize>,

    pub variant: Option<Algorithm>,
    pub theta: Option<f64>,
    pub k: Option<f64>,
    pub convention: Option<CostConvention>,
    pub epsilon: Option<f64>,
    pub max_weak: Option<usize>,
    pub init_rule: Option<InitRule>,
    pub solver_tolerance: Option<f64>,
    pub solver_max_iterations: Option<usize>,
    pub solver_memory: Option<usize>,

    pub n_pos: Option<usize>,
    pub n_neg: Option<usize>,
    pub seed: Option<u64>,

    pub manifest: Option<PathBuf>,
    pub window: Option<String>,

    pub data: Option<PathBuf>,
    pub negatives: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub cascade: Option<PathBuf>,

    pub structure: Option<CascadeStructure>,
    pub schedule: Option<Vec<usize>>,
    pub min_detection_rate: Option<f64>,
    pub max_false_positive_rate: Option<f64>,
    pub negatives_per_node: Option<usize>,
    pub stop_at_targets: Option<bool>,

    pub mode: Option<EvalMode>,
    pub fpr: Option<f64>,
    pub dr: Option<f64>,
    pub grid: Option<Vec<f64>>,
    pub threshold: Option<ThresholdRule>,
    pub table: Option<Table>,

    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub name: Option<String>,
    pub boundary: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read(path).map_err(|e| CliError::input(path, e.into()))?;
        serde_json::from_slice(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Boost settings from flags, then this file, then library defaults.
    pub fn boost(&self, args: &BoostArgs) -> BoostConfig {
        let d = BoostConfig::default();
        BoostConfig {
            algorithm: args.variant.or(self.variant).unwrap_or(d.algorithm),
            theta: args.theta.or(self.theta).unwrap_or(d.theta),
            k: args.k.or(self.k).unwrap_or(d.k),
            convention: args.convention.or(self.convention).unwrap_or(d.convention),
            epsilon: args.epsilon.or(self.epsilon).unwrap_or(d.epsilon),
            max_weak: args.max_weak.or(self.max_weak).unwrap_or(d.max_weak),
            init_rule: args.init_rule.or(self.init_rule).unwrap_or(d.init_rule),
            solver: SolverSettings {
                tolerance: args
                    .solver_tolerance
                    .or(self.solver_tolerance)
                    .unwrap_or(d.solver.tolerance),
                max_iterations: args
                    .solver_max_iterations
                    .or(self.solver_max_iterations)
                    .unwrap_or(d.solver.max_iterations),
                memory_size: args
                    .solver_memory
                    .or(self.solver_memory)
                    .unwrap_or(d.solver.memory_size),
            },
        }
    }
}

pub fn boost_json(c: &BoostConfig) -> serde_json::Value {
    serde_json::json!({
        "variant": c.algorithm,
        "theta": c.theta,
        "k": c.k,
        "convention": c.convention,
        "epsilon": c.epsilon,
        "max_weak": c.max_weak,
        "init_rule": c.init_rule,
        "solver_tolerance": c.solver.tolerance,
        "solver_max_iterations": c.solver.max_iterations,
        "solver_memory": c.solver.memory_size,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a dataset's labels and feature bits.
pub fn dataset_digest(data: &LabeledDataset) -> String {
    let mut h = Sha256::new();
    h.update((data.len() as u64).to_le_bytes());
    h.update((data.dims() as u64).to_le_bytes());
    for i in 0..data.len() {
        h.update([data.labels()[i] as u8]);
        for v in data.features().row(i) {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex(&h.finalize())
}

pub fn bytes_digest(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Hash of the resolved settings of one command and the digests of its
/// inputs. Output paths and the thread count are not part of it.
pub fn config_hash(command: &str, params: serde_json::Value, inputs: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "command": command,
        "params": params,
        "inputs": inputs,
    });
    bytes_digest(&serde_json::to_vec(&doc).expect("JSON values serialise"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = include_str!("../../../docs/config.schema.json");

    fn schema_properties() -> serde_json::Map<String, serde_json::Value> {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        schema["properties"].as_object().unwrap().clone()
    }

    #[test]
    fn schema_lists_every_key() {
        let keys: Vec<String> = match serde_json::to_value(RunConfig::default()).unwrap() {
            serde_json::Value::Object(m) => m.keys().cloned().collect(),
            _ => unreachable!(),
        };
        let mut documented: Vec<String> = schema_properties().keys().cloned().collect();
        let mut keys = keys;
        keys.sort();
        documented.sort();
        assert_eq!(keys, documented);
    }

    #[test]
    fn schema_enum_values_parse() {
        for (key, prop) in schema_properties() {
            let Some(values) = prop.get("enum").and_then(|v| v.as_array()) else {
                continue;
            };
            for v in values {
                let doc = serde_json::json!({ key.clone(): v });
                let parsed: Result<RunConfig, _> = serde_json::from_value(doc);
                assert!(parsed.is_ok(), "{key} = {v}");
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let parsed: Result<RunConfig, _> = serde_json::from_str(r#"{"thetta": 1}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn hash_is_stable_and_value_sensitive() {
        let a = config_hash(
            "train",
            serde_json::json!({"k": 2.0}),
            serde_json::json!({}),
        );
        let b = config_hash(
            "train",
            serde_json::json!({"k": 2.0}),
            serde_json::json!({}),
        );
        let c = config_hash(
            "train",
            serde_json::json!({"k": 3.0}),
            serde_json::json!({}),
        );
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }
}
