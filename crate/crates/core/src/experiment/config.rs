use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::ClusterSpec;
use crate::dynamics::{InitMode, SimConfig};
use crate::error::{Error, Result};
use crate::morpho::{AnalysisOptions, StructureThresholds, ThresholdRule};
use crate::netcore::{BiasMode, NetworkArch, OptimizerKind, TrainConfig};

/// One experiment: shared settings plus a table per subcommand. Every field
/// has a default, so an empty file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Number of runs; when absent each subcommand uses its own default.
    pub ensemble_size: Option<usize>,
    pub data: DataSection,
    pub simulate: SimulateSection,
    pub train: TrainSection,
    pub analyze: AnalyzeSection,
    pub verify: VerifySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            ensemble_size: None,
            data: DataSection::default(),
            simulate: SimulateSection::default(),
            train: TrainSection::default(),
            analyze: AnalyzeSection::default(),
            verify: VerifySection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    Intralayer,
    Coupled,
    Amplitude,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intralayer" => Ok(Model::Intralayer),
            "coupled" => Ok(Model::Coupled),
            "amplitude" => Ok(Model::Amplitude),
            other => Err(Error::Config(format!(
                "unknown model {other:?}; expected intralayer, coupled or amplitude"
            ))),
        }
    }
}

/// Synthetic clusters (seeded by the master seed) or an existing CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub input: Option<PathBuf>,
    pub n_samples: usize,
    pub n_clusters: usize,
    pub n_features: usize,
    pub std: f64,
    pub center_low: f64,
    pub center_high: f64,
    pub train_fraction: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        let c = ClusterSpec::default();
        Self {
            input: None,
            n_samples: c.n_samples,
            n_clusters: c.n_clusters,
            n_features: c.n_features,
            std: c.std,
            center_low: c.center_low,
            center_high: c.center_high,
            train_fraction: 0.8,
        }
    }
}

impl DataSection {
    pub fn cluster_spec(&self, seed: u64) -> ClusterSpec {
        ClusterSpec {
            n_samples: self.n_samples,
            n_clusters: self.n_clusters,
            n_features: self.n_features,
            std: self.std,
            center_low: self.center_low,
            center_high: self.center_high,
            seed,
        }
    }
}

/// Unset integration parameters take the defaults of the chosen model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub model: Model,
    /// Nodes per layer; 20 for the intralayer model and 10 otherwise.
    pub width: Option<usize>,
    pub layers: usize,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub r_init: Option<InitMode>,
    pub perturbation_scale: Option<f64>,
    pub c_init_low: Option<f64>,
    pub c_init_high: Option<f64>,
    /// Stride of the per-run trajectory files; defaults to `steps / 50`.
    pub record_every: Option<usize>,
    pub write_trajectories: bool,
    pub histogram_bins: usize,
    pub max_lag: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            model: Model::Intralayer,
            width: None,
            layers: 12,
            dt: None,
            steps: None,
            r_init: None,
            perturbation_scale: None,
            c_init_low: None,
            c_init_high: None,
            record_every: None,
            write_trajectories: true,
            histogram_bins: 40,
            max_lag: 3,
        }
    }
}

impl SimulateSection {
    pub fn width(&self) -> usize {
        self.width.unwrap_or(match self.model {
            Model::Intralayer => 20,
            Model::Coupled | Model::Amplitude => 10,
        })
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let base = match self.model {
            Model::Intralayer => SimConfig::intralayer(),
            Model::Coupled => SimConfig::coupled(),
            Model::Amplitude => SimConfig::amplitude(),
        };
        let steps = self.steps.unwrap_or(base.steps);
        let cfg = SimConfig {
            dt: self.dt.unwrap_or(base.dt),
            steps,
            seed: 0,
            r_init: self.r_init.unwrap_or(base.r_init),
            perturbation_scale: self.perturbation_scale.unwrap_or(base.perturbation_scale),
            c_init_low: self.c_init_low.unwrap_or(base.c_init_low),
            c_init_high: self.c_init_high.unwrap_or(base.c_init_high),
            record_every: self.record_every.unwrap_or((steps / 50).max(1)),
        };
        cfg.validate()?;
        if self.width() == 0 || self.layers == 0 {
            return Err(Error::Config("simulate.width and simulate.layers must be positive".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("simulate.histogram_bins must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub bias_mode: BiasMode,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub loss_halved: bool,
    pub init_low: f64,
    pub init_high: f64,
    pub snapshot_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden_width: 10,
            hidden_layers: 10,
            bias_mode: BiasMode::Trainable,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            epochs: t.epochs,
            optimizer: t.optimizer,
            loss_halved: t.loss_halved,
            init_low: t.init_low,
            init_high: t.init_high,
            snapshot_every: 50,
        }
    }
}

/// Weight initialization bounds of the high-variance control.
pub const HIGH_VARIANCE_INIT: (f64, f64) = (-1.0, 1.0);

impl TrainSection {
    pub fn arch(&self, inputs: usize) -> Result<NetworkArch> {
        NetworkArch::uniform(inputs, self.hidden_width, self.hidden_layers, self.bias_mode)
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            optimizer: self.optimizer,
            loss_halved: self.loss_halved,
            init_low: self.init_low,
            init_high: self.init_high,
            seed,
            snapshot_every: self.snapshot_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Directory of per-run snapshot directories; defaults to `<output_dir>/runs`.
    pub runs_dir: Option<PathBuf>,
    /// Keep networks with test accuracy above this value. When absent, keep
    /// those strictly above the ensemble median.
    pub accuracy_threshold: Option<f64>,
    /// Accuracy splitting the high/low groups of the contingency table.
    pub group_accuracy: f64,
    pub threshold_rule: ThresholdRule,
    pub rho_min: f64,
    pub a_max: f64,
    pub max_lag: usize,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        let s = StructureThresholds::default();
        let o = AnalysisOptions::default();
        Self {
            runs_dir: None,
            accuracy_threshold: None,
            group_accuracy: 0.9,
            threshold_rule: o.threshold_rule,
            rho_min: s.rho_min,
            a_max: s.a_max,
            max_lag: o.max_lag,
        }
    }
}

impl AnalyzeSection {
    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            threshold_rule: self.threshold_rule,
            structure: StructureThresholds {
                rho_min: self.rho_min,
                a_max: self.a_max,
            },
            max_lag: self.max_lag.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub nets: usize,
    pub inputs_per_net: usize,
    /// Largest layer width of the random networks.
    pub max_width: usize,
    /// Largest number of hidden layers of the random networks.
    pub max_hidden_layers: usize,
    pub tolerance: f64,
    pub finite_difference_step: f64,
    pub finite_difference_tolerance: f64,
    pub growth_states: usize,
    /// Corrupt one weight of every network seen by the path-sum evaluator.
    pub inject_fault: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            nets: 100,
            inputs_per_net: 10,
            max_width: 4,
            max_hidden_layers: 3,
            tolerance: 1e-10,
            finite_difference_step: 1e-6,
            finite_difference_tolerance: 1e-6,
            growth_states: 10_000,
            inject_fault: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            Error::Parse {
                path: origin.to_path_buf(),
                location,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn runs(&self, default: usize) -> Result<usize> {
        match self.ensemble_size {
            Some(0) => Err(Error::Config("ensemble_size must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.analyze
            .runs_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("runs"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("", Path::new("x.toml")).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig::default();
        c.master_seed = 42;
        c.ensemble_size = Some(7);
        c.simulate.model = Model::Amplitude;
        c.simulate.dt = Some(0.01);
        c.analyze.accuracy_threshold = Some(0.9);
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text, Path::new("x")).unwrap(), c);
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let err = ExperimentConfig::from_toml_str("master_seed = 1\n[train]\nepoch = 3\n", Path::new("c.toml"))
            .unwrap_err();
        match err {
            Error::Parse { location, .. } => assert_eq!(location, "line 3"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn model_defaults_fill_unset_fields() {
        let mut s = SimulateSection { model: Model::Amplitude, ..Default::default() };
        let cfg = s.sim_config().unwrap();
        assert_eq!((cfg.dt, cfg.steps, cfg.record_every), (0.001, 50_000, 1000));
        s.steps = Some(10);
        s.c_init_high = Some(2.0);
        let cfg = s.sim_config().unwrap();
        assert_eq!((cfg.steps, cfg.record_every, cfg.c_init_high), (10, 1, 2.0));
        assert_eq!("coupled".parse::<Model>().unwrap(), Model::Coupled);
        assert!("other".parse::<Model>().is_err());
    }

    #[test]
    fn zero_runs_is_rejected() {
        let c = ExperimentConfig { ensemble_size: Some(0), ..Default::default() };
        assert!(c.runs(5).is_err());
        assert_eq!(ExperimentConfig::default().runs(5).unwrap(), 5);
    }
}
