//! Run configuration: flag/config-file merging, order and rule parsing,
//! and the reproducibility sidecar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rotor::lattice::{CyclicOrder, DefaultRule, Direction, InitialRule};

use crate::CliError;

/// Everything needed to reproduce a run; serialized as the JSON sidecar
/// next to each artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    pub command: String,
    pub d: usize,
    /// Order spec as given ("ccw", "cw", or an explicit cycle).
    pub order: String,
    /// The explicit cycle actually used, so presets are unambiguous.
    pub resolved_order: Vec<String>,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub checkpoints: Vec<u64>,
    pub step_budget: u64,
    pub output: PathBuf,
}

/// Parses an order spec: a preset name or an explicit comma-separated
/// cycle such as `+e1,+e2,-e1,-e2` (the leading `+` is optional).
pub fn parse_order(spec: &str, d: usize) -> Result<CyclicOrder, CliError> {
    if !spec.contains(',') {
        return CyclicOrder::from_preset(spec, d)
            .map_err(|e| CliError::Usage(format!("bad --order: {e}")));
    }
    let mut seq = Vec::new();
    for tok in spec.split(',') {
        seq.push(parse_direction(tok.trim())?);
    }
    CyclicOrder::new(d, seq).map_err(|e| CliError::Usage(format!("bad --order: {e}")))
}

pub fn parse_direction(tok: &str) -> Result<Direction, CliError> {
    let bad = || CliError::Usage(format!("bad direction token {tok:?} (expected e.g. -e2)"));
    let (positive, rest) = match tok.as_bytes().first() {
        Some(b'-') => (false, &tok[1..]),
        Some(b'+') => (true, &tok[1..]),
        _ => (true, tok),
    };
    let axis: usize = rest
        .strip_prefix('e')
        .and_then(|a| a.parse().ok())
        .ok_or_else(bad)?;
    if axis == 0 {
        return Err(bad());
    }
    Ok(Direction::new(axis - 1, positive))
}

/// Parses a rule spec: `rho0`, `uniform-up`, or `custom:<path>` pointing
/// at an override-table file.
pub fn parse_rule(spec: &str, d: usize) -> Result<InitialRule, CliError> {
    match spec {
        "rho0" => Ok(InitialRule::Rho0),
        "uniform-up" => Ok(InitialRule::UniformUp),
        other => match other.strip_prefix("custom:") {
            Some(path) => parse_rule_table(Path::new(path), d),
            None => Err(CliError::Usage(format!(
                "bad --rule {spec:?} (expected rho0, uniform-up, or custom:<path>)"
            ))),
        },
    }
}

/// Override-table format: `default rho0|uniform-up`, then one
/// `override x1 .. xd dir` line per site.
fn parse_rule_table(path: &Path, d: usize) -> Result<InitialRule, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read rule table {path:?}: {e}")))?;
    let mut default = DefaultRule::Rho0;
    let mut overrides = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "default" if tok.len() == 2 => {
                default = match tok[1] {
                    "rho0" => DefaultRule::Rho0,
                    "uniform-up" => DefaultRule::UniformUp,
                    other => {
                        return Err(CliError::Usage(format!("bad default rule {other:?}")))
                    }
                };
            }
            "override" if tok.len() == d + 2 => {
                let site = tok[1..=d]
                    .iter()
                    .map(|t| t.parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("bad override site: {e}")))?;
                overrides.insert(site, parse_direction(tok[d + 1])?);
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "unrecognized rule-table line {line:?}"
                )))
            }
        }
    }
    Ok(InitialRule::custom(default, overrides))
}

/// Key=value config file; later flags override these values.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {path:?}: {e}")))?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {line:?} is not key=value")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Comma-separated checkpoint list.
pub fn parse_checkpoints(spec: &str) -> Result<Vec<u64>, CliError> {
    let mut out = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad checkpoint {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Default output root: `$ROTOR_OUT` or `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os("ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn order_strings(order: &CyclicOrder) -> Vec<String> {
    order.sequence().iter().map(|d| d.to_string()).collect()
}
