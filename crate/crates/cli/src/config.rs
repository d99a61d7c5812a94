//! Run configuration: one flat TOML table.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use shac_core::objective::benchmark;
use shac_core::{BudgetConfig, GbtConfig, ShacConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Shac,
    Rs,
    Rs2x,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Shac => "shac",
            Algorithm::Rs => "rs",
            Algorithm::Rs2x => "rs2x",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub objective: String,
    /// Total evaluations N. RS-2X spends twice this.
    pub budget: usize,
    pub workers: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,

    #[serde(default = "default_max_classifiers")]
    pub max_classifiers: usize,
    #[serde(default)]
    pub cv_enabled: bool,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_cv_threshold")]
    pub cv_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,

    #[serde(default = "defaults::rounds")]
    pub gbt_rounds: usize,
    #[serde(default = "defaults::max_depth")]
    pub gbt_max_depth: usize,
    #[serde(default = "defaults::learning_rate")]
    pub gbt_learning_rate: f64,
    #[serde(default = "defaults::l2")]
    pub gbt_l2_leaf_penalty: f64,
    #[serde(default = "defaults::min_child_hessian")]
    pub gbt_min_child_hessian: f64,
    #[serde(default = "defaults::min_split_gain")]
    pub gbt_min_split_gain: f64,
}

fn default_max_classifiers() -> usize {
    shac_core::shac::DEFAULT_MAX_CLASSIFIERS
}

fn default_cv_folds() -> usize {
    5
}

fn default_cv_threshold() -> f64 {
    0.5
}

mod defaults {
    use shac_core::GbtConfig;

    pub fn rounds() -> usize {
        GbtConfig::default().n_rounds
    }
    pub fn max_depth() -> usize {
        GbtConfig::default().max_depth
    }
    pub fn learning_rate() -> f64 {
        GbtConfig::default().learning_rate
    }
    pub fn l2() -> f64 {
        GbtConfig::default().l2_leaf_penalty
    }
    pub fn min_child_hessian() -> f64 {
        GbtConfig::default().min_child_hessian
    }
    pub fn min_split_gain() -> f64 {
        GbtConfig::default().min_split_gain
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn budget_config(&self) -> Result<BudgetConfig> {
        Ok(BudgetConfig::new(self.budget, self.workers)?)
    }

    pub fn shac_config(&self, seed: u64) -> Result<ShacConfig> {
        let config = ShacConfig {
            budget: self.budget_config()?,
            max_classifiers_cap: self.max_classifiers,
            cv_folds: self.cv_folds,
            cv_enabled: self.cv_enabled,
            cv_threshold: self.cv_threshold,
            gbt: GbtConfig {
                n_rounds: self.gbt_rounds,
                max_depth: self.gbt_max_depth,
                learning_rate: self.gbt_learning_rate,
                l2_leaf_penalty: self.gbt_l2_leaf_penalty,
                min_child_hessian: self.gbt_min_child_hessian,
                min_split_gain: self.gbt_min_split_gain,
            },
            max_attempts: self.max_attempts,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Everything that can be checked without evaluating anything.
    pub fn validate(&self) -> Result<()> {
        benchmark(&self.objective)?;
        self.budget_config()?;
        if self.seeds.is_empty() {
            bail!("seeds must list at least one seed");
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            bail!("seeds must be distinct");
        }
        if self.algorithm == Algorithm::Shac {
            self.shac_config(0)?;
        }
        Ok(())
    }
}
