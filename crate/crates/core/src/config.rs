//! The `repro` configuration file.
//!
//! ```toml
//! out = "results/tiny"
//!
//! [scenario]
//! name = "tiny"
//! n = 200
//! p = 40
//! structure = "grouped"
//! sites = 2
//! seed = 11
//! replicates = 2
//! [scenario.effects]
//! count = 4
//! size = 1.0
//!
//! [analysis]
//! methods = ["full", "heuristic", "block"]
//! buffer = 20
//! standardize = "local"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boost::FetchMode;
use crate::simgen::Scenario;
use crate::site::StandardizationMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    pub scenario: Scenario,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sites: SitesConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub methods: Vec<String>,
    pub buffer: usize,
    pub nu: f64,
    pub steps: usize,
    pub model_size: usize,
    pub standardize: StandardizationMode,
    /// Also run the univariable meta-analysis baseline.
    pub baseline: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            methods: vec!["full".into(), "heuristic".into(), "block".into()],
            buffer: 20,
            nu: 0.1,
            steps: 1000,
            model_size: 10,
            standardize: StandardizationMode::Local,
            baseline: true,
        }
    }
}

impl AnalysisConfig {
    pub fn fetch_modes(&self) -> Result<Vec<FetchMode>, String> {
        self.methods
            .iter()
            .map(|m| FetchMode::from_name(m, self.buffer).ok_or_else(|| format!("unknown method `{m}`")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SitesConfig {
    pub min_site_n: usize,
    pub host: String,
    pub connect_timeout_secs: u64,
}

impl Default for SitesConfig {
    fn default() -> Self {
        Self {
            min_site_n: 10,
            host: "127.0.0.1".into(),
            connect_timeout_secs: 10,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let config: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.scenario.validate().map_err(|e| e.to_string())?;
        let a = &self.analysis;
        let modes = a.fetch_modes()?;
        if modes.is_empty() && !a.baseline {
            return Err("nothing to run: no methods and no baseline".into());
        }
        if !(a.nu > 0.0 && a.nu <= 1.0) {
            return Err(format!("nu = {} outside (0, 1]", a.nu));
        }
        if a.steps == 0 {
            return Err("steps must be at least 1".into());
        }
        if a.buffer > self.scenario.p {
            return Err(format!("buffer {} exceeds p = {}", a.buffer, self.scenario.p));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"
out = "out"
[scenario]
name = "tiny"
n = 200
p = 40
structure = "grouped"
sites = 2
seed = 11
[scenario.effects]
count = 4
size = 1.0
[analysis]
methods = ["full", "block"]
buffer = 5
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(TINY).unwrap();
        assert_eq!(c.analysis.nu, 0.1);
        assert_eq!(c.analysis.model_size, 10);
        assert_eq!(c.sites.min_site_n, 10);
        assert_eq!(
            c.analysis.fetch_modes().unwrap(),
            vec![FetchMode::Full, FetchMode::BlockHeuristic { buffer: 5 }]
        );
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml(&format!("{TINY}colour = 3\n")).is_err());
        assert!(RunConfig::from_toml(&TINY.replace("\"block\"", "\"lasso\"")).is_err());
        assert!(RunConfig::from_toml(&TINY.replace("buffer = 5", "buffer = 5\nnu = 0.0")).is_err());
        assert!(RunConfig::from_toml(&TINY.replace("sites = 2", "sites = 3")).is_err());
    }
}
