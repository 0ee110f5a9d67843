//! Flat TOML run configuration. Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use consensus_core::coassoc::{CoassocMode, DEFAULT_STEPS, DEFAULT_T};
use consensus_core::generation::{EnsembleProtocol, StratificationPlan};
use consensus_core::moea::{GAConfig, Matching, ObjectiveTarget};
use consensus_core::pipeline::ConsensusOptions;
use consensus_core::scaling::Scaling;
use consensus_core::{Error, RandomSeed, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dataset: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,

    pub k_schedule: Vec<usize>,
    pub subspace_fraction: f64,
    pub scaling: Scaling,
    /// Rows drawn by stratified sampling; unset keeps every row.
    pub sample_size: Option<usize>,
    pub strata_bins: usize,
    /// Column names defining the strata; empty means the first three.
    pub strata_features: Vec<String>,
    pub min_stratum_size: usize,

    pub t: usize,
    pub steps: usize,
    pub coassoc: CoassocMode,
    pub generations: usize,
    pub stall_generations: usize,
    pub population: Option<usize>,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub objective_target: ObjectiveTarget,
    pub matching: Matching,
    /// Drop pass-through copies from the refined ensemble.
    pub dedup: bool,
    pub format: ReportFormat,

    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        let ga = GAConfig::default();
        Config {
            dataset: None,
            output_dir: None,
            seed: 42,
            k_schedule: (2..=8).collect(),
            subspace_fraction: 0.7,
            scaling: Scaling::MinMax,
            sample_size: None,
            strata_bins: 4,
            strata_features: Vec::new(),
            min_stratum_size: 2,
            t: DEFAULT_T,
            steps: DEFAULT_STEPS,
            coassoc: CoassocMode::Weighted,
            generations: ga.generations,
            stall_generations: ga.stall_generations,
            population: None,
            crossover_rate: ga.crossover_rate,
            mutation_rate: ga.mutation_rate,
            objective_target: ga.objective_target,
            matching: ga.matching,
            dedup: true,
            format: ReportFormat::Text,
            base_dir: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut config: Config =
            toml::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        config.base_dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text, path)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn dataset_path(&self) -> Result<PathBuf> {
        self.dataset
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config("config does not name a dataset".into()))
    }

    pub fn protocol(&self, seed: u64) -> EnsembleProtocol {
        EnsembleProtocol {
            k_schedule: self.k_schedule.clone(),
            subspace_fraction: self.subspace_fraction,
            scaling: self.scaling,
            seed: RandomSeed(seed),
        }
    }

    /// Sampling plan with strata columns resolved against `columns`.
    pub fn stratification(
        &self,
        sample_size: usize,
        columns: &[String],
    ) -> Result<StratificationPlan> {
        let features = self
            .strata_features
            .iter()
            .map(|name| {
                columns.iter().position(|c| c == name).ok_or_else(|| {
                    Error::Config(format!("strata feature '{name}' is not a dataset column"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StratificationPlan {
            bins_per_feature: self.strata_bins,
            sample_size,
            features,
            min_stratum_size: self.min_stratum_size,
        })
    }

    pub fn consensus_options(&self, seed: u64) -> ConsensusOptions {
        ConsensusOptions {
            t: self.t,
            steps: self.steps,
            mode: self.coassoc,
            dedup_refined: self.dedup,
            ga: GAConfig {
                crossover_rate: self.crossover_rate,
                mutation_rate: self.mutation_rate,
                population_size: self.population,
                generations: self.generations,
                stall_generations: self.stall_generations,
                objective_target: self.objective_target,
                matching: self.matching,
                seed: RandomSeed(seed),
            },
        }
    }
}
