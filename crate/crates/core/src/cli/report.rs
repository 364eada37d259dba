use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bayes::{BayesNet, Distribution, Evidence};
use crate::compose::{ExportValue, Provenance, SolveResult, SweepRow};

pub const TOOL: &str = "redvote";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    /// Hex SHA-256 of the model file bytes.
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &str, text: &str) -> Self {
        let hash = Sha256::digest(text.as_bytes());
        InputDigest {
            path: path.to_string(),
            sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Informational only; the verdict is the plain threshold comparison.
    pub sil_band: String,
}

impl Verdict {
    pub fn new(metric: &str, value: f64, threshold: f64) -> Self {
        Verdict {
            metric: metric.to_string(),
            value,
            threshold,
            pass: value <= threshold,
            sil_band: sil_band(value).to_string(),
        }
    }
}

/// Tolerable hazard rate bands, per hour.
pub fn sil_band(rate: f64) -> &'static str {
    match rate {
        r if r < 1e-9 => "below SIL 4 band (< 1e-9/h)",
        r if r < 1e-8 => "SIL 4 (1e-9/h to 1e-8/h)",
        r if r < 1e-7 => "SIL 3 (1e-8/h to 1e-7/h)",
        r if r < 1e-6 => "SIL 2 (1e-7/h to 1e-6/h)",
        r if r < 1e-5 => "SIL 1 (1e-6/h to 1e-5/h)",
        _ => "above SIL 1 band (>= 1e-5/h)",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub variable: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRow {
    pub id: usize,
    pub variable: String,
    pub state: String,
    pub probability: f64,
    pub observed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub instance: String,
    pub evidence: Vec<Observation>,
    /// Sorted by variable id, states in declaration order.
    pub rows: Vec<PosteriorRow>,
}

impl PosteriorTable {
    pub fn build(instance: &str, net: &BayesNet, evidence: &Evidence, posteriors: &[Distribution]) -> Self {
        let mut rows = Vec::new();
        for v in net.variables() {
            let observed = evidence.iter().find(|(id, _)| *id == v.id).map(|(_, s)| s);
            for (i, state) in v.states.iter().enumerate() {
                let probability = match observed {
                    Some(s) => f64::from(u8::from(s == state)),
                    None => posteriors
                        .iter()
                        .find(|d| d.variable == v.id)
                        .map_or(f64::NAN, |d| d.probs[i]),
                };
                rows.push(PosteriorRow {
                    id: v.id.0,
                    variable: v.name.clone(),
                    state: state.clone(),
                    probability,
                    observed: observed.is_some(),
                });
            }
        }
        PosteriorTable {
            instance: instance.to_string(),
            evidence: evidence
                .iter()
                .map(|(id, s)| Observation {
                    variable: net.variable(id).map_or_else(|| id.to_string(), |v| v.name.clone()),
                    state: s.to_string(),
                })
                .collect(),
            rows,
        }
    }

    pub fn probability(&self, variable: &str, state: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.variable == variable && r.state == state)
            .map(|r| r.probability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub workflow: String,
    pub input: InputDigest,
    /// Resolved inputs per instance.
    pub inputs: BTreeMap<String, BTreeMap<String, f64>>,
    /// Outputs per instance.
    pub outputs: BTreeMap<String, BTreeMap<String, f64>>,
    pub exports: Vec<ExportValue>,
    pub provenance: Vec<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posteriors: Option<PosteriorTable>,
    /// Present iff a threshold was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Seconds since the Unix epoch. Not covered by the input digest.
    pub generated_at: u64,
}

impl AnalysisReport {
    pub fn new(input: InputDigest, result: SolveResult) -> Self {
        AnalysisReport {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            workflow: result.workflow,
            input,
            inputs: result.inputs,
            outputs: result.instances,
            exports: result.exports,
            provenance: result.provenance,
            posteriors: None,
            verdict: None,
            generated_at: timestamp(),
        }
    }

    pub fn export(&self, name: &str) -> Option<f64> {
        self.exports.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReportRow {
    pub factor: f64,
    pub exports: Vec<ExportValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool: String,
    pub version: String,
    pub workflow: String,
    pub input: InputDigest,
    pub param: String,
    pub base_value: f64,
    pub rows: Vec<SweepReportRow>,
    pub generated_at: u64,
}

impl SweepReport {
    pub fn new(input: InputDigest, workflow: &str, param: &str, base_value: f64, rows: Vec<SweepRow>) -> Self {
        SweepReport {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            workflow: workflow.to_string(),
            input,
            param: param.to_string(),
            base_value,
            rows: rows
                .into_iter()
                .map(|r| SweepReportRow {
                    factor: r.factor,
                    exports: r.result.exports,
                })
                .collect(),
            generated_at: timestamp(),
        }
    }

    /// Export names, taken from the first row.
    pub fn columns(&self) -> Vec<&str> {
        self.rows
            .first()
            .map(|r| r.exports.iter().map(|e| e.name.as_str()).collect())
            .unwrap_or_default()
    }
}

/// Honours `SOURCE_DATE_EPOCH` for reproducible output.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}
