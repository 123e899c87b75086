use std::fmt;

use serde::{Deserialize, Serialize};

use super::BoostError;

/// Strategy for requesting pairwise cross-products from the sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum FetchMode {
    /// Whole covariance row of every included covariate.
    Full,
    /// Only rows restricted to the heuristic candidate set.
    Heuristic,
    /// Heuristic candidates plus `buffer` prefetched covariates, requested
    /// as a complete block.
    BlockHeuristic { buffer: usize },
}

impl FetchMode {
    /// Parses the command-line spelling (`full`, `heuristic`, `block`).
    pub fn from_name(name: &str, buffer: usize) -> Option<Self> {
        match name {
            "full" => Some(Self::Full),
            "heuristic" => Some(Self::Heuristic),
            "block" => Some(Self::BlockHeuristic { buffer }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Heuristic => "heuristic",
            Self::BlockHeuristic { .. } => "block",
        }
    }
}

impl fmt::Display for FetchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BlockHeuristic { buffer } => write!(f, "block-w{buffer}"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostingConfig {
    pub p: usize,
    /// Shrinkage factor in `(0, 1]`.
    pub nu: f64,
    pub max_steps: usize,
    /// Stop before a step would include more than this many covariates.
    pub target_model_size: Option<usize>,
    pub mode: FetchMode,
}

impl BoostingConfig {
    pub const DEFAULT_NU: f64 = 0.1;

    pub fn new(p: usize, mode: FetchMode) -> Self {
        Self {
            p,
            nu: Self::DEFAULT_NU,
            max_steps: 1000,
            target_model_size: Some(10),
            mode,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_target(mut self, target: Option<usize>) -> Self {
        self.target_model_size = target;
        self
    }

    pub fn validate(&self) -> Result<(), BoostError> {
        if self.p == 0 {
            return Err(BoostError::InvalidConfig("p must be at least 1".into()));
        }
        if !(self.nu.is_finite() && self.nu > 0.0 && self.nu <= 1.0) {
            return Err(BoostError::InvalidConfig(format!(
                "nu must lie in (0, 1], got {}",
                self.nu
            )));
        }
        if self.max_steps == 0 {
            return Err(BoostError::InvalidConfig("max_steps must be at least 1".into()));
        }
        if let FetchMode::BlockHeuristic { buffer } = self.mode {
            if buffer > self.p {
                return Err(BoostError::InvalidConfig(format!(
                    "buffer {buffer} exceeds covariate count {}",
                    self.p
                )));
            }
        }
        Ok(())
    }
}
