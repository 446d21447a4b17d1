//! Experiment configuration: a JSON document naming a model, an ordered
//! suite of checks and optional tolerance overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::checks::{self, CheckParams};
use crate::error::CliError;

pub const TOLERANCE_RANGE: (f64, f64) = (1e-14, 1e-2);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub suite: Vec<CheckSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Per-check tolerance overrides keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Asserts that the run uses no randomness beyond fixed probe vectors.
    #[serde(default = "default_true")]
    pub seedless: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Shift(ShiftSpec),
    FreeEvolution(FreeEvolutionSpec),
    Cocycle(CocycleSpec),
    Dilation(DilationSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    #[serde(default = "default_half_width")]
    pub half_width: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEvolutionSpec {
    #[serde(default = "one")]
    pub time: f64,
    #[serde(default = "two")]
    pub cutoff: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

/// One Fourier coefficient `ĥ_k = re + i·im` of the real function `h`;
/// the conjugate coefficient at `−k` is implied.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub k: i64,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    #[serde(default = "default_winding")]
    pub m: i64,
    #[serde(default = "default_h_hat")]
    pub h_hat: Vec<Coefficient>,
    #[serde(default = "golden")]
    pub theta: f64,
    #[serde(default = "default_half_width")]
    pub half_width: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationSpec {
    #[serde(default = "default_flow_time")]
    pub t: f64,
    #[serde(default = "default_dy")]
    pub dy: f64,
    #[serde(default = "default_dilation_width")]
    pub half_width: usize,
}

fn default_half_width() -> usize {
    64
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_points() -> usize {
    256
}
fn default_winding() -> i64 {
    1
}
/// `h(x) = sin(2πx)/(2π)`, so that `h′(x) = cos(2πx)`.
fn default_h_hat() -> Vec<Coefficient> {
    vec![Coefficient { k: 1, re: 0.0, im: -1.0 / (4.0 * PI) }]
}
fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}
fn default_flow_time() -> f64 {
    0.1
}
fn default_dy() -> f64 {
    0.05
}
fn default_dilation_width() -> usize {
    31
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub op: String,
    /// Label used in reports and tolerance overrides; defaults to `op`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl CheckSpec {
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.op)
    }
}

/// A suite entry after validation.
#[derive(Debug, Clone)]
pub struct PlannedCheck {
    pub name: String,
    pub op: &'static str,
    pub params: CheckParams,
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    /// Validate the suite and tolerances and resolve each check.
    pub fn plan(&self) -> Result<Vec<PlannedCheck>, CliError> {
        if !self.seedless {
            return Err(CliError::config("seedless must be true: every check is deterministic"));
        }
        let mut names = BTreeSet::new();
        let mut planned = Vec::with_capacity(self.suite.len());
        for spec in &self.suite {
            let info = checks::lookup(&spec.op)
                .ok_or_else(|| CliError::config(format!("unknown check op {:?}", spec.op)))?;
            let name = spec.label().to_string();
            if !names.insert(name.clone()) {
                return Err(CliError::config(format!("duplicate check name {name:?}")));
            }
            let params = CheckParams::parse(info.name, &spec.params)
                .map_err(|e| CliError::config(format!("check {name:?}: {e}")))?;
            let tolerance = self.tolerances.get(&name).copied().unwrap_or(info.default_tolerance);
            planned.push(PlannedCheck { name, op: info.name, params, tolerance });
        }
        for (key, &tol) in &self.tolerances {
            if !names.contains(key) {
                return Err(CliError::config(format!("tolerance override for unknown check {key:?}")));
            }
            let (lo, hi) = TOLERANCE_RANGE;
            if !(lo..=hi).contains(&tol) {
                return Err(CliError::config(format!(
                    "tolerance {tol:e} for {key:?} outside [{lo:e}, {hi:e}]"
                )));
            }
        }
        Ok(planned)
    }

    /// Canonical JSON of the config with defaults filled in.
    pub fn canonical(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("config serializes")
    }

    /// Content hash in the style of a git object id, with SHA-256.
    pub fn hash(&self) -> String {
        let body = self.canonical();
        let mut h = Sha256::new();
        h.update(format!("config {}\0", body.len()).as_bytes());
        h.update(&body);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_str(r#"{"model": {"model": "cocycle"}}"#).unwrap();
        match &c.model {
            ModelSpec::Cocycle(s) => {
                assert_eq!(s.m, 1);
                assert_eq!(s.half_width, 64);
                assert_eq!(s.h_hat.len(), 1);
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(c.suite.is_empty());
        assert!(c.plan().unwrap().is_empty());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_str(r#"{"model": {"model": "shift"}, "extra": 1}"#).is_err());
        assert!(ExperimentConfig::from_str(r#"{"model": {"model": "shift", "k": 3}}"#).is_err());
        let c = ExperimentConfig::from_str(
            r#"{"model": {"model": "shift"}, "suite": [{"op": "certify_mourre", "params": {"bogus": 1}}]}"#,
        )
        .unwrap();
        assert!(c.plan().is_err());
    }

    #[test]
    fn parse_error_carries_position() {
        match ExperimentConfig::from_str("{\n  \"model\": ,\n}") {
            Err(CliError::Config { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tolerance_range_enforced() {
        let base = r#"{"model": {"model": "shift"}, "suite": [{"op": "verify_identity_a"}], "tolerances": {"verify_identity_a": TOL}}"#;
        for (tol, ok) in [("1e-12", true), ("1e-15", false), ("0.5", false), ("1e-2", true)] {
            let c = ExperimentConfig::from_str(&base.replace("TOL", tol)).unwrap();
            assert_eq!(c.plan().is_ok(), ok, "tolerance {tol}");
        }
    }

    #[test]
    fn hash_is_stable_under_formatting() {
        let a = ExperimentConfig::from_str(r#"{"model":{"model":"shift"}}"#).unwrap();
        let b = ExperimentConfig::from_str("{ \"model\" : { \"model\" : \"shift\", \"half_width\": 64 } }").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
