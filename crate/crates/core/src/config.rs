//! Simulation configuration: TOML parsing, validation and the tuning
//! presets used for the wage tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{LogLogisticParams, UniformInterval};
use crate::error::{Error, Result};
use crate::mechanisms::{AlphaConfig, ChaudhuriDecks, ErikssonDeck, SwitchingConfig};
use crate::population::{plug_in_alpha, plug_in_alpha_bounded};

pub const DESK_POPULATION_REPLICATIONS: usize = 200;
pub const DESK_SAMPLES_PER_POPULATION: usize = 1000;
pub const FULL_POPULATION_REPLICATIONS: usize = 1000;
pub const FULL_SAMPLES_PER_POPULATION: usize = 1000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdMode {
    /// One standard deviation over all `P·S` estimates of a cell.
    #[default]
    Pooled,
    /// Average of the per-population standard deviations.
    Within,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlugInFrame {
    /// Concentration relative to `(0, M)`.
    #[default]
    Full,
    /// Concentration relative to `(m, M)`.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaOptSource {
    Fixed {
        value: f64,
    },
    PlugIn {
        #[serde(default)]
        frame: PlugInFrame,
        prior_mean: Option<f64>,
        prior_variance: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSettings {
    pub m: Option<f64>,
    #[serde(rename = "M")]
    pub upper: Option<f64>,
    #[serde(rename = "T")]
    pub threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_opt: Option<AlphaOptSource>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSettings {
    pub eriksson: Option<ErikssonDeck>,
    pub chaudhuri: Option<ChaudhuriDecks>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub summary: Option<PathBuf>,
    pub raw: Option<PathBuf>,
    pub quantiles: Option<PathBuf>,
    pub max_raw_records: Option<u64>,
}

fn default_distribution() -> LogLogisticParams {
    LogLogisticParams::CZECH_WAGES_2014
}

fn default_p() -> usize {
    DESK_POPULATION_REPLICATIONS
}

fn default_s() -> usize {
    DESK_SAMPLES_PER_POPULATION
}

/// Configuration as written in the file. Mechanism and size fields may be
/// left out when a table preset supplies them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub master_seed: u64,
    #[serde(default = "default_p")]
    pub population_replications: usize,
    #[serde(default = "default_s")]
    pub samples_per_population: usize,
    #[serde(default)]
    pub population_sizes: Vec<usize>,
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    /// Worker threads; defaults to the number of available cores.
    pub workers: Option<usize>,
    #[serde(default)]
    pub sd_mode: SdMode,
    #[serde(default = "default_distribution")]
    pub distribution: LogLogisticParams,
    #[serde(default)]
    pub mechanism: MechanismSettings,
    #[serde(default)]
    pub baselines: BaselineSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TablePreset {
    pub m: f64,
    pub upper: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub alpha_opt: f64,
}

/// Tuning parameters of the three wage tables, keyed by table number 2, 3, 4.
pub fn table_preset(table: u32) -> Result<TablePreset> {
    let (upper, threshold, alpha_opt) = match table {
        2 => (40_000.0, 30_000.0, 0.72),
        3 => (60_000.0, 45_000.0, 0.59),
        4 => (80_000.0, 45_000.0, 0.52),
        other => {
            return Err(Error::Config(format!(
                "unknown table {other}, expected 2, 3 or 4"
            )))
        }
    };
    Ok(TablePreset {
        m: 7_000.0,
        upper,
        threshold,
        alpha: 0.75,
        alpha_opt,
    })
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub master_seed: u64,
    pub population_replications: usize,
    pub samples_per_population: usize,
    /// `(N, n)` cells in the order they are reported.
    pub cells: Vec<(usize, usize)>,
    pub workers: Option<usize>,
    pub sd_mode: SdMode,
    pub distribution: LogLogisticParams,
    pub bounds: UniformInterval,
    pub switching: SwitchingConfig,
    pub alpha: AlphaConfig,
    pub alpha_opt: AlphaConfig,
    pub eriksson: Option<ErikssonDeck>,
    pub chaudhuri: Option<ChaudhuriDecks>,
    pub output: OutputSettings,
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Fills every unset mechanism and size field from a table preset.
    pub fn apply_table_preset(&mut self, table: u32) -> Result<()> {
        let p = table_preset(table)?;
        let mech = &mut self.mechanism;
        mech.m.get_or_insert(p.m);
        mech.upper.get_or_insert(p.upper);
        mech.threshold.get_or_insert(p.threshold);
        mech.alpha.get_or_insert(p.alpha);
        mech.alpha_opt
            .get_or_insert(AlphaOptSource::Fixed { value: p.alpha_opt });
        if self.population_sizes.is_empty() {
            self.population_sizes = vec![200, 400];
        }
        if self.sample_sizes.is_empty() {
            self.sample_sizes = vec![20, 50];
        }
        Ok(())
    }

    /// Switches to the full replication counts.
    pub fn use_full_scale(&mut self) {
        self.population_replications = FULL_POPULATION_REPLICATIONS;
        self.samples_per_population = FULL_SAMPLES_PER_POPULATION;
    }

    pub fn resolve(&self) -> Result<RunSpec> {
        let missing = |name: &str| Error::Config(format!("mechanism.{name} is not set"));
        self.distribution.validate()?;
        if self.population_replications == 0 || self.samples_per_population == 0 {
            return Err(Error::Config(
                "population_replications and samples_per_population must be at least 1".into(),
            ));
        }
        if self.population_sizes.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::Config(
                "population_sizes and sample_sizes must be non-empty".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let mut cells = Vec::new();
        for &big_n in &self.population_sizes {
            if big_n < 2 {
                return Err(Error::PopulationTooSmall(big_n));
            }
            for &n in &self.sample_sizes {
                if n == 0 || n > big_n {
                    return Err(Error::SizeMismatch {
                        n,
                        population: big_n,
                    });
                }
                cells.push((big_n, n));
            }
        }

        let mech = &self.mechanism;
        let m = mech.m.ok_or_else(|| missing("m"))?;
        let upper = mech.upper.ok_or_else(|| missing("M"))?;
        let bounds = UniformInterval::rrt(m, upper)?;
        let switching = SwitchingConfig::new(mech.threshold.ok_or_else(|| missing("T"))?, bounds)?;
        let alpha = AlphaConfig::new(mech.alpha.ok_or_else(|| missing("alpha"))?, bounds)?;
        let source = mech.alpha_opt.ok_or_else(|| missing("alpha_opt"))?;
        let alpha_opt =
            AlphaConfig::new(alpha_for_run(&source, &self.distribution, &bounds)?, bounds)?;

        if let Some(deck) = &self.baselines.eriksson {
            deck.validate()?;
        }
        if let Some(decks) = &self.baselines.chaudhuri {
            decks.validate()?;
        }

        Ok(RunSpec {
            master_seed: self.master_seed,
            population_replications: self.population_replications,
            samples_per_population: self.samples_per_population,
            cells,
            workers: self.workers,
            sd_mode: self.sd_mode,
            distribution: self.distribution,
            bounds,
            switching,
            alpha,
            alpha_opt,
            eriksson: self.baselines.eriksson.clone(),
            chaudhuri: self.baselines.chaudhuri.clone(),
            output: self.output.clone(),
        })
    }
}

/// α used by the optimal-α estimator. The plug-in route takes prior moments
/// from the config, or else from the configured wage distribution.
pub fn alpha_for_run(
    source: &AlphaOptSource,
    distribution: &LogLogisticParams,
    bounds: &UniformInterval,
) -> Result<f64> {
    match *source {
        AlphaOptSource::Fixed { value } => {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::AlphaOutOfRange(value));
            }
            Ok(value)
        }
        AlphaOptSource::PlugIn {
            frame,
            prior_mean,
            prior_variance,
        } => {
            let mu = prior_mean
                .or_else(|| distribution.mean())
                .ok_or(Error::MissingPriorMoments)?;
            let sigma2 = prior_variance
                .or_else(|| distribution.variance())
                .ok_or(Error::MissingPriorMoments)?;
            match frame {
                PlugInFrame::Full => plug_in_alpha(mu, sigma2, bounds.hi),
                PlugInFrame::Bounded => plug_in_alpha_bounded(mu, sigma2, bounds),
            }
        }
    }
}
