//! JSON run configuration.

use std::path::PathBuf;

use restart_ar_core::scenarios::{scenario_by_name, CATALOG};
use restart_ar_core::{LimitLawParams, ModelFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    CyclePool,
    LongRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub m: Option<u64>,
    pub m_grid: Option<Vec<u64>>,
    pub samples: Option<usize>,
    pub burn_in: Option<u64>,
    pub horizon: Option<u64>,
    pub replicas: Option<u64>,
    pub thin: Option<u64>,
    pub mode: Option<ModeName>,
    pub chains: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandOptions {
    pub direction: Option<Vec<f64>>,
    /// Frequencies for `limit-cf`.
    pub t_grid: Option<Vec<f64>>,
    /// Evaluation points for `limit-pdf`; defaults to a line along `direction`.
    pub points: Option<Vec<Vec<f64>>>,
    pub max_order: Option<usize>,
    pub targets: Option<Vec<f64>>,
    /// Radius of the neighbourhood in the hitting-time probe; enables the probe in `tau`.
    pub epsilon: Option<f64>,
    pub horizons: Option<Vec<u64>>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<u64>,
    pub criteria: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Everything a command needs. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub scenario: Option<String>,
    pub model: Option<ModelFamily>,
    pub limit: Option<LimitLawParams>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub options: CommandOptions,
    #[serde(default)]
    pub output: OutputSection,
}

pub const DEFAULT_M: u64 = 1000;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_REPLICAS: u64 = 1000;
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Parses a JSON document. Field-level problems are collected rather than stopping at the first.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<String>> {
    let cfg = parse_unchecked(text)?;
    let errors = cfg.problems();
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Syntax and key checks only; [`RunConfig::problems`] is left to the caller.
pub fn parse_unchecked(text: &str) -> Result<RunConfig, Vec<String>> {
    serde_json::from_str(text).map_err(|e| vec![e.to_string()])
}

impl RunConfig {
    /// Problems that make the configuration unusable for any command.
    pub fn problems(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.seed.is_none() {
            errors.push("seed required".to_string());
        }
        if let Some(model) = &self.model {
            errors.extend(
                model
                    .structural_errors()
                    .into_iter()
                    .map(|e| format!("model: {e}")),
            );
        }
        if let Some(name) = &self.scenario {
            if !CATALOG.contains(&name.as_str()) {
                errors.push(format!(
                    "scenario: unknown name '{name}'; known: {}",
                    CATALOG.join(", ")
                ));
            }
        }
        if let Some(limit) = &self.limit {
            let d = limit.mu.len();
            if limit.sigma.len() != d || limit.sigma.iter().any(|r| r.len() != d) {
                errors.push(format!("limit: sigma must be {d} x {d} to match mu"));
            }
        }
        let run = &self.run;
        if run.m == Some(0) || run.m_grid.as_ref().is_some_and(|g| g.contains(&0)) {
            errors.push("run: m must be at least 1".into());
        }
        if run.m_grid.as_ref().is_some_and(|g| g.is_empty()) {
            errors.push("run: m_grid must not be empty".into());
        }
        if run.samples == Some(0) {
            errors.push("run: samples must be at least 1".into());
        }
        if run.thin == Some(0) {
            errors.push("run: thin must be at least 1".into());
        }
        if run.replicas == Some(0) {
            errors.push("run: replicas must be at least 1".into());
        }
        if run.horizon == Some(0) {
            errors.push("run: horizon must be at least 1".into());
        }
        if run.chains == Some(0) {
            errors.push("run: chains must be at least 1".into());
        }
        errors
    }

    /// Fills unset run fields with defaults. A named scenario supplies its own grid and size.
    pub fn fill_defaults(&mut self) {
        if let Some(s) = self
            .scenario
            .as_deref()
            .and_then(|n| scenario_by_name(n).ok())
        {
            if self.run.m_grid.is_none() {
                self.run.m_grid = Some(match self.run.m {
                    Some(m) => vec![m],
                    None => s.m_grid.clone(),
                });
            }
            self.run.samples.get_or_insert(s.samples);
        }
        let run = &mut self.run;
        let m = *run.m.get_or_insert(DEFAULT_M);
        run.samples.get_or_insert(DEFAULT_SAMPLES);
        run.thin.get_or_insert(1);
        run.mode.get_or_insert(ModeName::CyclePool);
        run.chains.get_or_insert(1);
        run.replicas.get_or_insert(DEFAULT_REPLICAS);
        run.horizon.get_or_insert(100 * m);
        run.burn_in.get_or_insert(10 * m);
        self.options.max_order.get_or_insert(DEFAULT_MAX_ORDER);
        self.output.format.get_or_insert(Format::Both);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let mut cfg = parse_config(r#"{"seed": 42, "scenario": "example-1.1"}"#).unwrap();
        cfg.fill_defaults();
        assert_eq!(cfg.run.m_grid, Some(vec![10_000]));
        assert_eq!(cfg.run.samples, Some(100_000));
        assert_eq!(cfg.output.format, Some(Format::Both));
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&echo).unwrap(), cfg);
    }

    #[test]
    fn missing_seed() {
        let errors = parse_config(r#"{"scenario": "example-1.1"}"#).unwrap_err();
        assert_eq!(errors, vec!["seed required".to_string()]);
    }

    #[test]
    fn bad_probabilities_are_reported_with_other_problems() {
        let text = r#"{
            "model": {
                "dim": 1, "a": 1.0,
                "alpha": {"kind": "two-point-shifted", "values": [1.25, 0.75], "probs": [0.5, 0.4], "shift": 0.5},
                "beta": {"kind": "inv-sqrt-m"}, "gamma": {"kind": "inv-sqrt-m"},
                "noise": {"kind": "uniform-interval", "lo": -1.0, "hi": 1.0},
                "region": {"kind": "interval", "lo": -0.5, "hi": 0.5}
            },
            "run": {"samples": 0}
        }"#;
        let errors = parse_config(text).unwrap_err();
        assert!(errors.iter().any(|e| e == "seed required"));
        assert!(errors
            .iter()
            .any(|e| e.contains("probabilities must sum to 1")));
        assert!(errors.iter().any(|e| e.contains("samples")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let errors = parse_config(r#"{"seed": 1, "sede": 2}"#).unwrap_err();
        assert!(errors[0].contains("unknown field"));
        assert!(parse_config(r#"{"seed": 1, "run": {"n": 3}}"#).is_err());
    }
}
