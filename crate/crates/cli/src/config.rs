//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use cklh::hamilton::CoefficientSpec;
use cklh::space::{CanonicalSpace, KappaPair, ParallelPoint};
use cklh::verify::{Sampling, Tolerances};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    /// A canonical space by name; alternative to `[kappa]`.
    pub space: Option<CanonicalSpace>,
    pub kappa: Option<KappaPair>,
    /// Spaces covered by `verify` and `tables`; all nine when absent.
    pub spaces: Option<Vec<CanonicalSpace>>,
    pub coefficients: Option<CoefficientSpec>,
    pub initial: Option<Vec<ParallelPoint>>,
    #[serde(default)]
    pub time: TimeWindow,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub contract: ContractSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t1: 1.0,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Write one CSV and metadata file per integrated solution.
    pub trajectories: bool,
    /// Sample times used by `superpose`.
    pub samples: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trajectories: true,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractSpec {
    pub deltas: Vec<f64>,
}

impl Default for ContractSpec {
    fn default() -> Self {
        Self {
            deltas: cklh::contraction::DEFAULT_DELTAS.to_vec(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let start = e.span().map_or(0, |s| s.start).min(text.len());
            let before = &text[..start];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            ConfigError::Parse {
                path: path.to_path_buf(),
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })
    }

    /// The single space of `integrate` and `superpose`.
    pub fn kappa_pair(&self) -> Result<KappaPair, ConfigError> {
        match (self.space, self.kappa) {
            (Some(s), None) => Ok(s.kappa()),
            (None, Some(k)) if k.kappa1.is_finite() && k.kappa2.is_finite() => Ok(k),
            (None, Some(_)) => Err(ConfigError::Invalid("kappa values must be finite".into())),
            (Some(_), Some(_)) => Err(ConfigError::Invalid("give either `space` or `[kappa]`, not both".into())),
            (None, None) => Err(ConfigError::Invalid("missing `space` or `[kappa]`".into())),
        }
    }

    pub fn spaces(&self) -> Vec<CanonicalSpace> {
        self.spaces.clone().unwrap_or_else(|| CanonicalSpace::ALL.to_vec())
    }
}
