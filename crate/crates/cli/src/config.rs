use std::path::{Path, PathBuf};

use hypermin::graph::domains::DomainProblem;
use hypermin::graph::plateau::PlateauOptions;
use hypermin::graph::SolverOptions;
use hypermin::hyperbolic::AmbientKind;
use hypermin::reflection::ExampleParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const DEFAULTS: &str = include_str!("../defaults.toml");

/// Keys whose values are replaced rather than merged, because they hold an
/// enum whose variant may change.
const REPLACE: &[&str] = &[
    "domain", "data", "corners", "lambda", "t_const", "y_cuts", "cusps",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub model: ModelConfig,
    pub barrier: BarrierConfig,
    pub solve: SolveConfig,
    pub plateau: PlateauConfig,
    pub example: ExampleConfig,
    pub classify: ClassifyConfig,
    pub trap: TrapConfig,
    pub verify: VerifyConfig,
    pub report: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub tau: f64,
    pub h: f64,
    pub y0: f64,
    pub ambient: AmbientKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub lambda: Vec<f64>,
    pub t_const: Vec<f64>,
    pub step: f64,
    pub u_range: [f64; 2],
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub jitter: f64,
    pub problem: DomainProblem,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauConfig {
    pub corners: Vec<[f64; 3]>,
    pub options: PlateauOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleConfig {
    pub id: u8,
    pub params: ExampleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub curve: PathBuf,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapMode {
    Slab,
    Hemisphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub mesh: PathBuf,
    pub mode: TrapMode,
    pub kind: [i64; 2],
    pub line: [f64; 4],
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub mesh: PathBuf,
    pub chi: i64,
    pub y_cuts: Vec<f64>,
    pub cusps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub y_cuts: Vec<f64>,
}

fn parse_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    } else {
        let v: toml::Value = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
        serde_json::to_value(v).map_err(|e| CliError::config(e.to_string()))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if !REPLACE.contains(&k.as_str()) => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Defaults merged with the optional config file.
pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let defaults: toml::Value = toml::from_str(DEFAULTS).expect("shipped defaults parse");
    let mut value = serde_json::to_value(defaults).expect("defaults convert to JSON");
    if let Some(p) = path {
        merge(&mut value, parse_file(p)?);
    }
    serde_json::from_value(value).map_err(|e| CliError::config(format!("config: {e}")))
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Parse a cusp list entry: `inf` or a finite number.
pub fn cusp(s: &str) -> Result<Option<f64>, CliError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        return Ok(None);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| CliError::config(format!("invalid cusp point {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_load() {
        let c = load(None).unwrap();
        assert_eq!(c.example.params, ExampleParams::default());
        assert_eq!(c.solve.solver, SolverOptions::default());
        assert_eq!(c.plateau.options, PlateauOptions::default());
        assert_eq!(c.verify.y_cuts, vec![4.0, 8.0, 16.0]);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut v = serde_json::to_value(load(None).unwrap()).unwrap();
        merge(&mut v, serde_json::json!({"model": {"bogus": 1}}));
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn enum_values_are_replaced() {
        let mut v = serde_json::to_value(load(None).unwrap()).unwrap();
        merge(
            &mut v,
            serde_json::json!({"solve": {"problem": {"domain": {"ideal_triangle": {"vertices": ["infinity", {"finite": 0.0}, {"finite": 1.0}]}}}}}),
        );
        assert!(serde_json::from_value::<RunConfig>(v).is_ok());
    }
}
