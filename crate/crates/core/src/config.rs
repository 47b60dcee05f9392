//! Engine configuration: one strict, human-editable TOML document.
//!
//! Unknown keys are errors (with a best-guess suggestion) so that a typo
//! can never silently fall back to a default epidemiological constant.
//! Every problem in a file is reported in one pass.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::distributions::EpiDistributions;
use crate::error::{Error, Result};
use crate::risk::RiskParams;

/// Probabilistic-model settings: the base survival parameter, the
/// probability-space notification threshold, and how the symptom CDF `G`
/// is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbConfig {
    pub nu: f64,
    pub p_min: f64,
    /// Monte Carlo sample count for building `G`.
    pub mc_samples: usize,
    /// Grid step for `G`, days.
    pub grid_step: f64,
    /// Seed for every sampling operation driven by the config.
    pub seed: u64,
}

impl Default for ProbConfig {
    fn default() -> Self {
        // p_min = 1 - nu^r_min at the default nu and r_min, so the
        // probabilistic and score-space thresholds agree out of the box.
        ProbConfig {
            nu: 0.5,
            p_min: 0.718_735,
            mc_samples: 1_000_000,
            grid_step: 0.05,
            seed: 42,
        }
    }
}

impl ProbConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.nu > 0.0 && self.nu < 1.0) {
            problems.push(format!("prob.nu: must be in (0, 1), got {}", self.nu));
        }
        if !(self.p_min > 0.0 && self.p_min < 1.0) {
            problems.push(format!("prob.p_min: must be in (0, 1), got {}", self.p_min));
        }
        if self.mc_samples < crate::distributions::MIN_SUM_CDF_SAMPLES {
            problems.push(format!(
                "prob.mc_samples: must be at least {}, got {}",
                crate::distributions::MIN_SUM_CDF_SAMPLES,
                self.mc_samples
            ));
        }
        if self.grid_step <= 0.0 || !self.grid_step.is_finite() {
            problems.push(format!(
                "prob.grid_step: must be positive, got {}",
                self.grid_step
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { problems })
        }
    }
}

/// The full engine configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EngineConfig {
    pub risk: RiskParams,
    pub epi: EpiDistributions,
    pub prob: ProbConfig,
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for result in [
            self.risk.validate(),
            self.epi.validate(),
            self.prob.validate(),
        ] {
            if let Err(Error::Validation { problems: more }) = result {
                problems.extend(more);
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { problems })
        }
    }
}

const RISK_KEYS: &[&str] = &[
    "d_min",
    "mu0",
    "sigma0",
    "delta_t_max",
    "r_min",
    "rssi_ref",
    "rssi_ref_distance",
    "path_loss_exponent",
    "include_post_onset_events",
];
const EPI_KEYS: &[&str] = &[
    "incubation_meanlog",
    "incubation_sdlog",
    "generation_shape",
    "generation_scale",
];
const PROB_KEYS: &[&str] = &["nu", "p_min", "mc_samples", "grid_step", "seed"];
const SECTIONS: &[&str] = &["risk", "epi", "prob"];

/// Loads and validates a config file; absent keys fall back to defaults.
pub fn load_config(path: &Path) -> Result<EngineConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses config text; collects every problem before failing.
pub fn parse_config(text: &str) -> Result<EngineConfig> {
    let root: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("TOML syntax: {e}")))?;

    let mut config = EngineConfig::default();
    let mut problems = Vec::new();

    for (section, value) in &root {
        let keys = match section.as_str() {
            "risk" => RISK_KEYS,
            "epi" => EPI_KEYS,
            "prob" => PROB_KEYS,
            other => {
                problems.push(unknown(other, "", SECTIONS, "section"));
                continue;
            }
        };
        let Value::Table(table) = value else {
            problems.push(format!("[{section}]: must be a table"));
            continue;
        };
        for (key, v) in table {
            if !keys.contains(&key.as_str()) {
                problems.push(unknown(key, &format!("{section}."), keys, "key"));
                continue;
            }
            if let Err(problem) = assign(&mut config, section, key, v) {
                problems.push(problem);
            }
        }
    }

    if let Err(Error::Validation { problems: more }) = config.validate() {
        problems.extend(more);
    }
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(Error::Validation { problems })
    }
}

fn unknown(name: &str, prefix: &str, known: &[&str], what: &str) -> String {
    match closest(name, known) {
        Some(suggestion) => {
            format!("unknown {what} `{prefix}{name}` (did you mean `{prefix}{suggestion}`?)")
        }
        None => format!("unknown {what} `{prefix}{name}`"),
    }
}

fn assign(
    config: &mut EngineConfig,
    section: &str,
    key: &str,
    value: &Value,
) -> std::result::Result<(), String> {
    let path = || format!("{section}.{key}");
    let as_f64 = |v: &Value| -> std::result::Result<f64, String> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(format!(
                "{}: expected a number, got {}",
                path(),
                other.type_str()
            )),
        }
    };
    let as_i64 = |v: &Value| -> std::result::Result<i64, String> {
        match v {
            Value::Integer(i) => Ok(*i),
            other => Err(format!(
                "{}: expected an integer, got {}",
                path(),
                other.type_str()
            )),
        }
    };
    match (section, key) {
        ("risk", "d_min") => config.risk.d_min = as_f64(value)?,
        ("risk", "mu0") => config.risk.mu0 = as_f64(value)?,
        ("risk", "sigma0") => config.risk.sigma0 = as_f64(value)?,
        ("risk", "delta_t_max") => config.risk.delta_t_max = as_i64(value)?,
        ("risk", "r_min") => config.risk.r_min = as_f64(value)?,
        ("risk", "rssi_ref") => config.risk.rssi_ref = as_f64(value)?,
        ("risk", "rssi_ref_distance") => config.risk.rssi_ref_distance = as_f64(value)?,
        ("risk", "path_loss_exponent") => config.risk.path_loss_exponent = as_f64(value)?,
        ("risk", "include_post_onset_events") => match value {
            Value::Boolean(b) => config.risk.include_post_onset_events = *b,
            other => {
                return Err(format!(
                    "{}: expected a boolean, got {}",
                    path(),
                    other.type_str()
                ))
            }
        },
        ("epi", "incubation_meanlog") => config.epi.incubation_meanlog = as_f64(value)?,
        ("epi", "incubation_sdlog") => config.epi.incubation_sdlog = as_f64(value)?,
        ("epi", "generation_shape") => config.epi.generation_shape = as_f64(value)?,
        ("epi", "generation_scale") => config.epi.generation_scale = as_f64(value)?,
        ("prob", "nu") => config.prob.nu = as_f64(value)?,
        ("prob", "p_min") => config.prob.p_min = as_f64(value)?,
        ("prob", "mc_samples") => {
            let n = as_i64(value)?;
            if n < 0 {
                return Err(format!("{}: must be non-negative, got {n}", path()));
            }
            config.prob.mc_samples = n as usize;
        }
        ("prob", "grid_step") => config.prob.grid_step = as_f64(value)?,
        ("prob", "seed") => {
            let n = as_i64(value)?;
            if n < 0 {
                return Err(format!("{}: must be non-negative, got {n}", path()));
            }
            config.prob.seed = n as u64;
        }
        _ => unreachable!("key list and assignment table out of sync"),
    }
    Ok(())
}

/// Closest known name: edit distance discounted by the shared prefix, so
/// `sigma_zero` still points at `sigma0`.
fn closest<'a>(name: &str, known: &[&'a str]) -> Option<&'a str> {
    known
        .iter()
        .map(|k| {
            let prefix = name
                .chars()
                .zip(k.chars())
                .take_while(|(a, b)| a == b)
                .count();
            (levenshtein(name, k).saturating_sub(prefix), *k)
        })
        .min_by_key(|(score, _)| *score)
        .filter(|(score, _)| *score <= 2)
        .map(|(_, k)| k)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitute = prev + usize::from(ca != cb);
            prev = row[j + 1];
            row[j + 1] = substitute.min(prev + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}
