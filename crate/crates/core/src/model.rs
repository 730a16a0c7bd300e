//! Versioned JSON documents for trained ensembles and cascades, plus the
//! per-round trace CSV.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so a save/load cycle is exact. Infinite offsets (accept-all
//! or reject-all nodes) are stored as the strings `"inf"` and `"-inf"`.

use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boost::{Algorithm, RoundRecord, StopReason, TrainTrace};
use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, Stump};
use crate::losses::CostConvention;

pub const FORMAT_VERSION: u32 = 1;

mod extended_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad number {other:?}"))),
            },
        }
    }
}

/// Coefficients of the model after a given training round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryEntry {
    pub round: usize,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub variant: Algorithm,
    pub theta: Option<f64>,
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<CostConvention>,
    pub stumps: Vec<Stump>,
    pub w: Vec<f64>,
    #[serde(with = "extended_f64")]
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<HistoryEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl ModelDocument {
    pub fn new(algorithm: Algorithm, theta: f64, k: f64, ensemble: &Ensemble) -> Self {
        let tc = algorithm != Algorithm::AdaBoost;
        ModelDocument {
            format_version: FORMAT_VERSION,
            variant: algorithm,
            theta: tc.then_some(theta),
            k: tc.then_some(k),
            convention: tc.then_some(CostConvention::default()),
            stumps: ensemble.stumps().to_vec(),
            w: ensemble.weights().to_vec(),
            b: ensemble.offset(),
            stop: None,
            history: None,
            config_hash: None,
        }
    }

    pub fn with_convention(mut self, convention: CostConvention) -> Self {
        if self.k.is_some() {
            self.convention = Some(convention);
        }
        self
    }

    pub fn with_trace(mut self, trace: &TrainTrace) -> Self {
        self.stop = trace.stop;
        self.history = Some(
            trace
                .rounds
                .iter()
                .map(|r| HistoryEntry {
                    round: r.round,
                    weights: r.weights.clone(),
                })
                .collect(),
        );
        self
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        for s in &self.stumps {
            Stump::new(s.feature, s.threshold, s.polarity)?;
        }
        Ensemble::new(self.stumps.clone(), self.w.clone(), self.b)
    }

    /// Trace reconstructed from the stored history (weights only).
    pub fn trace(&self) -> Option<TrainTrace> {
        let history = self.history.as_ref()?;
        Some(TrainTrace {
            rounds: history
                .iter()
                .map(|h| RoundRecord {
                    round: h.round,
                    stump: None,
                    edge: None,
                    primal: f64::NAN,
                    dual: None,
                    gap: None,
                    nonzero: h
                        .weights
                        .iter()
                        .filter(|&&v| v > crate::boost::EFFECTIVE_TOL)
                        .count(),
                    weights: h.weights.clone(),
                    solver_iterations: 0,
                    solver_converged: true,
                })
                .collect(),
            stop: self.stop,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes one CSV row per training round.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &TrainTrace) -> Result<()> {
    writeln!(
        out,
        "round,feature,threshold,polarity,edge,primal,dual,gap,nonzero,solver_iterations,solver_converged"
    )?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &trace.rounds {
        let (f, t, p) = match r.stump {
            Some(s) => (
                s.feature.to_string(),
                s.threshold.to_string(),
                s.polarity.to_string(),
            ),
            None => Default::default(),
        };
        writeln!(
            out,
            "{},{f},{t},{p},{},{},{},{},{},{},{}",
            r.round,
            opt(r.edge),
            r.primal,
            opt(r.dual),
            opt(r.gap),
            r.nonzero,
            r.solver_iterations,
            r.solver_converged
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Ensemble {
        Ensemble::new(
            vec![
                Stump::new(0, 0.1 + 0.2, 1).unwrap(),
                Stump::new(3, -1.0 / 3.0, -1).unwrap(),
            ],
            vec![std::f64::consts::FRAC_1_SQRT_2, 1e-300],
            0.25,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_exact() {
        let doc = ModelDocument::new(Algorithm::Tc2, 0.001, 7.0, &sample());
        let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.ensemble().unwrap(), sample());
    }

    #[test]
    fn infinite_offset() {
        let e = sample().with_offset(f64::NEG_INFINITY);
        let doc = ModelDocument::new(Algorithm::AdaBoost, 0.0, 1.0, &e);
        let text = doc.to_json().unwrap();
        assert!(text.contains("\"-inf\""));
        assert_eq!(
            ModelDocument::from_json(&text).unwrap().b,
            f64::NEG_INFINITY
        );
        assert_eq!(doc.theta, None);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let doc = ModelDocument::new(Algorithm::Tc1, 0.01, 2.0, &sample());
        let text = doc.to_json().unwrap().replacen('{', "{\"extra\": 1,", 1);
        assert!(ModelDocument::from_json(&text).is_err());
        let mut v2 = doc.clone();
        v2.format_version = 99;
        assert!(v2.ensemble().is_err());
    }

    #[test]
    fn field_order_is_stable() {
        let text = ModelDocument::new(Algorithm::Tc1, 0.01, 2.0, &sample())
            .to_json()
            .unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("format_version") < pos("variant"));
        assert!(pos("variant") < pos("theta"));
        assert!(pos("stumps") < pos("w"));
        assert!(pos("w") < pos("b"));
    }
}
