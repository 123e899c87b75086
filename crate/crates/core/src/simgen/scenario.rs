use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// Every pair of neighbouring covariates agrees with `p_same_between`.
    Moderate,
    /// Neighbours inside a group agree with `p_same_within`, across groups
    /// with `p_same_between`.
    Grouped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    pub count: usize,
    pub size: f64,
    #[serde(default = "one")]
    pub per_group: usize,
}

fn one() -> usize {
    1
}

impl EffectSpec {
    pub fn strong() -> Self {
        Self {
            count: 10,
            size: 1.0,
            per_group: 1,
        }
    }

    pub fn weak() -> Self {
        Self {
            count: 50,
            size: 0.2,
            per_group: 1,
        }
    }
}

/// One simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub structure: Structure,
    #[serde(default = "defaults::group_size")]
    pub group_size: usize,
    #[serde(default = "defaults::p_same_within")]
    pub p_same_within: f64,
    #[serde(default = "defaults::p_same_between")]
    pub p_same_between: f64,
    pub effects: EffectSpec,
    /// Number of cohorts the data are split into.
    pub sites: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
}

mod defaults {
    pub fn group_size() -> usize {
        5
    }
    pub fn p_same_within() -> f64 {
        0.75
    }
    pub fn p_same_between() -> f64 {
        0.5
    }
}

pub const DESK_P: usize = 250;
pub const FULL_P: usize = 2500;

impl Scenario {
    pub fn new(name: impl Into<String>, n: usize, p: usize, structure: Structure, effects: EffectSpec) -> Self {
        Self {
            name: name.into(),
            n,
            p,
            structure,
            group_size: defaults::group_size(),
            p_same_within: defaults::p_same_within(),
            p_same_between: defaults::p_same_between(),
            effects,
            sites: 1,
            seed: 1,
            replicates: 1,
        }
    }

    /// Desk-scale setting with `p = 250`. Effect counts are kept as in the
    /// full-scale design since they fit.
    pub fn desk(n: usize, structure: Structure, effects: EffectSpec) -> Self {
        let strength = if effects.size >= 1.0 { "strong" } else { "weak" };
        let structure_name = match structure {
            Structure::Moderate => "moderate",
            Structure::Grouped => "grouped",
        };
        let name = format!("{structure_name}-{}{strength}-n{n}", effects.count);
        Self::new(name, n, DESK_P, structure, effects)
    }

    pub fn with_sites(mut self, sites: usize) -> Self {
        self.sites = sites;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_full_scale(mut self) -> Self {
        self.p = FULL_P;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let scenario: Self = toml::from_str(text).map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.n == 0 || self.p == 0 {
            return bad("n and p must be positive".into());
        }
        if self.sites == 0 {
            return bad("at least one site is required".into());
        }
        if !self.n.is_multiple_of(self.sites) {
            return Err(SimError::IndivisibleSplit {
                n: self.n,
                sites: self.sites,
            });
        }
        if self.group_size == 0 {
            return bad("group_size must be positive".into());
        }
        for q in [self.p_same_within, self.p_same_between] {
            if !(1.0 / 3.0..=1.0).contains(&q) {
                return bad(format!("agreement probability {q} outside [1/3, 1]"));
            }
        }
        if !self.effects.size.is_finite() {
            return bad("effect size must be finite".into());
        }
        if !(1..=2).contains(&self.effects.per_group) {
            return bad("per_group must be 1 or 2".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be positive".into());
        }
        super::place_effects(self).map(|_| ())
    }

    /// Probability that column `j` (zero-based, `j ≥ 1`) agrees with column `j − 1`.
    pub fn agreement(&self, j: usize) -> f64 {
        match self.structure {
            Structure::Grouped if !j.is_multiple_of(self.group_size) => self.p_same_within,
            _ => self.p_same_between,
        }
    }
}

/// Copy probability giving exact agreement `q` with a uniform ternary
/// redraw: `q = ρ + (1 − ρ)/3`.
pub fn copy_probability(q: f64) -> f64 {
    (q - 1.0 / 3.0) / (2.0 / 3.0)
}
