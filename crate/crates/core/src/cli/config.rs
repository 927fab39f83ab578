//! Run configuration: a TOML file with one table per command. Every key has a
//! default, and command-line flags override the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::split::{DEFAULT_TEST_FRACTION, DEFAULT_VAL_FRACTION};
use crate::data::{CaseMode, SyntheticGenConfig, NANOS_PER_SECOND};
use crate::error::{Error, Result};
use crate::eval::{CoeffRatioConfig, DEFAULT_K_MAX};
use crate::models::ModelConfig;
use crate::wellposed::DEFAULT_CHECKPOINTS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub val_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: DEFAULT_TEST_FRACTION,
            val_fraction: DEFAULT_VAL_FRACTION,
        }
    }
}

/// Labeling of raw event streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    /// Fixed-horizon length.
    pub horizon_ns: i64,
    /// Snapshot period for fixed-horizon labels; 0 labels every event.
    pub snapshot_period_ns: i64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            horizon_ns: NANOS_PER_SECOND,
            snapshot_period_ns: NANOS_PER_SECOND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_max: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { k_max: DEFAULT_K_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffRatioRunConfig {
    /// Synthetic datasets generated when no data files are given.
    pub runs: usize,
    pub n_samples: usize,
    /// Generate with no dependence on local sizes.
    pub null: bool,
    pub regression: CoeffRatioConfig,
}

impl Default for CoeffRatioRunConfig {
    fn default() -> Self {
        Self {
            runs: 20,
            n_samples: 20_000,
            null: false,
            regression: CoeffRatioConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellposedConfig {
    pub checkpoints: Vec<u64>,
}

impl Default for WellposedConfig {
    fn default() -> Self {
        Self {
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    pub case: CaseMode,
    pub out: PathBuf,
    pub synth: SyntheticGenConfig,
    pub label: LabelConfig,
    pub split: SplitConfig,
    pub model: ModelConfig,
    pub eval: EvalConfig,
    pub coeffratio: CoeffRatioRunConfig,
    pub wellposed: WellposedConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            case: CaseMode::NextMove,
            out: PathBuf::from("out"),
            synth: SyntheticGenConfig::default(),
            label: LabelConfig::default(),
            split: SplitConfig::default(),
            model: ModelConfig::default(),
            eval: EvalConfig::default(),
            coeffratio: CoeffRatioRunConfig::default(),
            wellposed: WellposedConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Push the master seed and case mode into the per-command sections.
    pub fn propagate(&mut self) {
        self.synth.seed = self.seed;
        self.synth.law.case = self.case;
        self.model.train.seed = self.seed;
        self.coeffratio.regression.train.seed = self.seed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_sections() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        let c = RunConfig::from_toml("seed = 7\ncase = 1\n[model.train]\nepochs = 3\n[synth]\nn_samples = 10\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.case, CaseMode::FixedHorizon);
        assert_eq!(c.model.train.epochs, 3);
        assert_eq!(c.synth.n_samples, 10);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
