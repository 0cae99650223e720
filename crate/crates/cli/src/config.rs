use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use admm::AdmmConfig;
use netmodel::canonical::{feeder8, feeder8_two_regions};
use netmodel::{load_case, load_partition, PowerNetwork};
use protocol::{Delivery, ProtocolConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Centralized,
    Plain,
    Phe,
    Dp,
    Audit,
    Compare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scheduling {
    Deterministic,
    Stress,
}

/// Everything a run depends on. A run is reproducible from this value alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    /// case file; the built-in 8-bus feeder when absent
    pub case: Option<PathBuf>,
    /// partition file; the built-in two-region split of the feeder when both are absent
    pub partition: Option<PathBuf>,
    pub seed: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub penalty_min: u64,
    pub penalty_max: u64,
    pub key_bits: u64,
    pub scale: u64,
    pub word_bits: u32,
    pub beta: f64,
    pub max_outer: usize,
    /// initial bound n̂⁰ of the DP noise schedules
    pub noise_n0: f64,
    pub scheduling: Scheduling,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AdmmConfig::default();
        RunConfig {
            mode: Mode::Compare,
            case: None,
            partition: None,
            seed: a.seed,
            alpha: a.alpha,
            epsilon: a.epsilon,
            penalty_min: a.penalty_range.0,
            penalty_max: a.penalty_range.1,
            key_bits: 512,
            scale: a.scale,
            word_bits: a.word_bits,
            beta: a.beta,
            max_outer: a.max_outer,
            noise_n0: 0.1,
            scheduling: Scheduling::Deterministic,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {msg}")]
    Range { field: &'static str, msg: String },
    #[error("{field}: file {path} does not exist")]
    MissingFile { field: &'static str, path: PathBuf },
    #[error("{field}: {msg}")]
    Load { field: &'static str, msg: String },
    #[error("scale: {scale} overflows {word_bits}-bit words for values up to {max_value}")]
    ScaleOverflow { scale: u64, word_bits: u32, max_value: f64 },
    #[error("key_bits: {key_bits}-bit keys cannot hold weighted differences of {needed_bits} bits (max|value|·scale·c_max·a_max < n/2)")]
    KeyOverflow { key_bits: u64, needed_bits: u64 },
    #[error("partition: required when a case file is given")]
    PartitionRequired,
}

fn range_err(field: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Range { field, msg: msg.into() }
}

/// Largest boundary scalar the network can produce: |X_ij|, |Z_ij| ≤ v_max².
pub fn max_boundary_value(net: &PowerNetwork) -> f64 {
    net.buses.iter().map(|b| b.v_max * b.v_max).fold(0.0, f64::max)
}

impl RunConfig {
    pub fn admm(&self) -> AdmmConfig {
        AdmmConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
            penalty_range: (self.penalty_min, self.penalty_max),
            max_outer: self.max_outer,
            beta: self.beta,
            scale: self.scale,
            word_bits: self.word_bits,
            seed: self.seed,
            ..AdmmConfig::default()
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        let delivery = match self.scheduling {
            Scheduling::Deterministic => Delivery::Deterministic,
            Scheduling::Stress => Delivery::Shuffled { seed: self.seed },
        };
        ProtocolConfig { key_bits: self.key_bits, delivery }
    }

    pub fn network(&self) -> Result<PowerNetwork, ConfigError> {
        match &self.case {
            None => Ok(feeder8()),
            Some(p) => {
                if !p.exists() {
                    return Err(ConfigError::MissingFile { field: "case", path: p.clone() });
                }
                load_case(p).map_err(|e| ConfigError::Load { field: "case", msg: e.to_string() })
            }
        }
    }

    pub fn assignment(&self) -> Result<BTreeMap<i64, usize>, ConfigError> {
        match (&self.case, &self.partition) {
            (_, Some(p)) => {
                if !p.exists() {
                    return Err(ConfigError::MissingFile { field: "partition", path: p.clone() });
                }
                load_partition(p).map_err(|e| ConfigError::Load { field: "partition", msg: e.to_string() })
            }
            (None, None) => Ok(feeder8_two_regions()),
            (Some(_), None) => Err(ConfigError::PartitionRequired),
        }
    }

    /// Every violated bound, not just the first.
    pub fn validate(&self) -> Result<(), Vec<ConfigError>> {
        let mut errs = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            errs.push(range_err("alpha", format!("{} must be positive", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            errs.push(range_err("epsilon", format!("{} must be positive", self.epsilon)));
        }
        if self.penalty_min == 0 || self.penalty_min > self.penalty_max {
            errs.push(range_err("penalty_min", format!("need 1 ≤ penalty_min ≤ penalty_max, got {}..{}", self.penalty_min, self.penalty_max)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            errs.push(range_err("beta", format!("{} must lie in (0, 1)", self.beta)));
        }
        if self.max_outer == 0 {
            errs.push(range_err("max_outer", "must be at least 1"));
        }
        if self.scale == 0 {
            errs.push(range_err("scale", "must be positive"));
        }
        if !(2..=120).contains(&self.word_bits) {
            errs.push(range_err("word_bits", format!("{} outside 2..=120", self.word_bits)));
        }
        if !(self.noise_n0 >= 0.0 && self.noise_n0.is_finite()) {
            errs.push(range_err("noise_n0", format!("{} must be finite and non-negative", self.noise_n0)));
        }
        if self.key_bits < 32 {
            errs.push(range_err("key_bits", format!("{} is below 32", self.key_bits)));
        }
        let net = self.network().map_err(|e| errs.push(e)).ok();
        if let Err(e) = self.assignment() {
            errs.push(e);
        }
        if let (Some(net), true) = (net, errs.is_empty()) {
            let max_value = max_boundary_value(&net);
            let word_limit = 2f64.powi(self.word_bits as i32 - 1);
            if max_value * self.scale as f64 >= word_limit {
                errs.push(ConfigError::ScaleOverflow { scale: self.scale, word_bits: self.word_bits, max_value });
            }
            // a difference of two values, scaled, times the two factor maxima, below n/2 ≥ 2^(bits−2)
            let product = 2.0 * max_value * self.scale as f64 * self.penalty_max as f64 * self.penalty_max as f64;
            let formula_bits = product.log2().ceil() as u64 + 2;
            // the protocol also guards the full word range: 2^word_bits·c_max below n/2
            let word_range_bits = self.word_bits as u64 + (64 - self.penalty_max.leading_zeros()) as u64 + 3;
            let needed_bits = formula_bits.max(word_range_bits);
            if needed_bits > self.key_bits {
                errs.push(ConfigError::KeyOverflow { key_bits: self.key_bits, needed_bits });
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(errs) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Load { field: "config", msg: format!("{}: {e}", path.display()) })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Load { field: "config", msg: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        assert_eq!(RunConfig::default().validate(), Ok(()));
    }

    #[test]
    fn overflow_bounds_are_named() {
        let c = RunConfig { scale: 10_000_000_000, word_bits: 32, ..RunConfig::default() };
        let errs = c.validate().unwrap_err();
        assert!(matches!(errs[..], [ConfigError::ScaleOverflow { .. }]), "{errs:?}");
        assert!(errs[0].to_string().starts_with("scale"));

        let c = RunConfig { key_bits: 64, ..RunConfig::default() };
        let errs = c.validate().unwrap_err();
        assert!(matches!(errs[..], [ConfigError::KeyOverflow { key_bits: 64, .. }]), "{errs:?}");
    }

    #[test]
    fn every_violation_is_reported() {
        let c = RunConfig { alpha: -1.0, beta: 1.5, penalty_min: 300, ..RunConfig::default() };
        let fields: Vec<String> = c.validate().unwrap_err().iter().map(|e| e.to_string()).collect();
        assert_eq!(fields.len(), 3, "{fields:?}");
        assert!(fields[0].starts_with("alpha"));
        assert!(fields[1].starts_with("penalty_min"));
        assert!(fields[2].starts_with("beta"));
    }

    #[test]
    fn missing_partition_file_is_named() {
        let c = RunConfig { partition: Some(PathBuf::from("/nonexistent/p.json")), ..RunConfig::default() };
        let errs = c.validate().unwrap_err();
        assert_eq!(errs, vec![ConfigError::MissingFile { field: "partition", path: PathBuf::from("/nonexistent/p.json") }]);
        assert!(errs[0].to_string().contains("partition"));
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig { seed: 9, mode: Mode::Phe, ..RunConfig::default() };
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
