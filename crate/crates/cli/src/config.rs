//! TOML experiment configuration.

use std::path::Path;

use serde::Deserialize;

use flda::classify::TrainConfig;
use flda::error::{Error, Result};
use flda::synthetic::SyntheticSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub sizes: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

fn default_repetitions() -> usize {
    50
}

impl Default for CurveSection {
    fn default() -> Self {
        CurveSection {
            sizes: vec![2, 5, 10, 20, 50, 100, 200, 500, 1000],
            repetitions: default_repetitions(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub synthetic: Option<SyntheticSpec>,
    pub train: Option<TrainConfig>,
    pub curve: Option<CurveSection>,
    pub perturb: Option<PerturbSection>,
}

impl FileConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn synthetic_required(&self) -> Result<SyntheticSpec> {
        self.synthetic
            .clone()
            .ok_or_else(|| Error::Config("config file needs a [synthetic] section".into()))
    }
}
