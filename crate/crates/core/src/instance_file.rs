//! JSON instance descriptions.
//!
//! ```json
//! {
//!   "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5},
//!   "arms": [
//!     {"type": "uniform", "lo": 0.0, "hi": 1.0},
//!     {"type": "power_tail", "mu_star": 0.9, "A": 1.0, "beta": 0.5},
//!     {"type": "point_mass", "mu_star": 0.4},
//!     {"type": "mixture", "components": [
//!       {"weight": 0.5, "type": "point_mass", "mu_star": 0.1},
//!       {"weight": 0.5, "type": "uniform", "lo": 0.0, "hi": 0.2}
//!     ]}
//!   ]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit_env::{BanditInstance, InstanceError};
use crate::reward_models::{DistributionError, RewardDistribution, TailParams};

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance description: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("arm {index}: {source}")]
    Arm {
        index: usize,
        #[source]
        source: DistributionError,
    },
    #[error("tail: {0}")]
    Tail(DistributionError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    #[serde(rename = "A")]
    pub a: f64,
    pub beta: f64,
    pub eps0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmSpec {
    PowerTail {
        mu_star: f64,
        #[serde(rename = "A")]
        a: f64,
        beta: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    PointMass {
        mu_star: f64,
    },
    Mixture {
        components: Vec<ComponentSpec>,
    },
}

/// A mixture component: a weight next to the fields of an arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Map<String, serde_json::Value>")]
pub struct ComponentSpec {
    pub weight: f64,
    #[serde(flatten)]
    pub arm: ArmSpec,
}

impl TryFrom<serde_json::Map<String, serde_json::Value>> for ComponentSpec {
    type Error = String;

    fn try_from(mut map: serde_json::Map<String, serde_json::Value>) -> Result<Self, String> {
        let weight = map
            .remove("weight")
            .ok_or("mixture component without a weight")?
            .as_f64()
            .ok_or("mixture weight must be a number")?;
        let arm =
            serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| e.to_string())?;
        Ok(Self { weight, arm })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub tail: TailSpec,
    pub arms: Vec<ArmSpec>,
}

impl ArmSpec {
    pub fn build(&self) -> Result<RewardDistribution, DistributionError> {
        match self {
            Self::PowerTail { mu_star, a, beta } => {
                RewardDistribution::power_tail(*mu_star, *a, *beta)
            }
            Self::Uniform { lo, hi } => RewardDistribution::uniform(*lo, *hi),
            Self::PointMass { mu_star } => RewardDistribution::point_mass(*mu_star),
            Self::Mixture { components } => {
                let parts = components
                    .iter()
                    .map(|c| c.arm.build().map(|d| (c.weight, d)))
                    .collect::<Result<Vec<_>, _>>()?;
                RewardDistribution::mixture(parts)
            }
        }
    }
}

impl InstanceSpec {
    pub fn parse(text: &str) -> Result<Self, InstanceFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, InstanceFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| InstanceFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn tail_params(&self) -> Result<TailParams, InstanceFileError> {
        TailParams::new(self.tail.a, self.tail.beta, self.tail.eps0)
            .map_err(InstanceFileError::Tail)
    }

    pub fn distributions(&self) -> Result<Vec<RewardDistribution>, InstanceFileError> {
        self.arms
            .iter()
            .enumerate()
            .map(|(index, a)| {
                a.build()
                    .map_err(|source| InstanceFileError::Arm { index, source })
            })
            .collect()
    }

    /// Builds the instance, checking every arm against the tail envelope.
    pub fn instance(&self) -> Result<BanditInstance, InstanceFileError> {
        Ok(BanditInstance::new(
            self.distributions()?,
            self.tail_params()?,
        )?)
    }

    pub fn instance_unchecked(&self) -> Result<BanditInstance, InstanceFileError> {
        Ok(BanditInstance::new_unchecked(
            self.distributions()?,
            self.tail_params()?,
        )?)
    }
}

pub fn load_instance(path: &Path) -> Result<BanditInstance, InstanceFileError> {
    InstanceSpec::read(path)?.instance()
}
