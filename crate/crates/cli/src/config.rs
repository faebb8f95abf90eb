//! Experiment configuration: a JSON file mirroring the solver, channel, ELM,
//! and sweep parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hbf_core::channel::{ChannelModelParams, NoiseDbConvention, SystemConfig};
use hbf_core::elm::Activation;
use hbf_core::fp_fd::FpStop;
use hbf_core::mm_hbf::{MmStop, PipelineStops};

use crate::{CliError, CliResult};

/// ELM hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElmParams {
    pub hidden_nodes: usize,
    pub activation: Activation,
    /// Ridge trade-off weighting the fit term.
    pub lambda: f64,
}

impl Default for ElmParams {
    fn default() -> Self {
        Self {
            hidden_nodes: 1000,
            activation: Activation::PRelu(0.25),
            lambda: 1000.0,
        }
    }
}

/// Training-set shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetParams {
    pub realizations: usize,
    pub noisy_per_realization: usize,
    pub snr_train_db: Vec<f64>,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            realizations: 100,
            noisy_per_realization: 100,
            snr_train_db: vec![15.0, 20.0, 25.0],
        }
    }
}

/// Sweep axes and trial counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepParams {
    /// Operating SNR axis (dB) for the rate sweep.
    pub snr_db: Vec<f64>,
    /// SNR_Test axis (dB) for the robustness sweep.
    pub snr_test_db: Vec<f64>,
    /// BS antenna counts for the timing sweep.
    pub nt_list: Vec<usize>,
    /// Monte-Carlo trials per sweep point.
    pub trials: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            snr_test_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            nt_list: vec![16, 36, 64],
            trials: 50,
        }
    }
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub channel: ChannelModelParams,
    #[serde(default)]
    pub fp_stop: FpStop,
    #[serde(default)]
    pub mm_stop: MmStop,
    #[serde(default)]
    pub elm: ElmParams,
    #[serde(default)]
    pub dataset: DatasetParams,
    #[serde(default)]
    pub sweep: SweepParams,
    /// dB conversion for the synthetic perturbation variance.
    #[serde(default)]
    pub noise_db_convention: NoiseDbConvention,
    /// When set, the rate sweep feeds every method channels perturbed at
    /// this SNR_Test instead of clean ones (imperfect CSI).
    #[serde(default)]
    pub snr_test_db: Option<f64>,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    /// Trained model location (read by the sweeps, written by `train`).
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    /// Dataset location (written by `gen-dataset`, read by `train`).
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    /// Default output path for CSV results.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("cannot parse config file {}: {e}", path.display()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.system
            .validate()
            .and_then(|_| self.channel.validate(&self.system))
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.sweep.trials == 0 {
            return Err(CliError::Config("sweep.trials must be >= 1".into()));
        }
        if self.elm.hidden_nodes == 0 || self.elm.lambda.is_nan() || self.elm.lambda <= 0.0 {
            return Err(CliError::Config(
                "elm.hidden_nodes must be >= 1 and elm.lambda positive".into(),
            ));
        }
        if self.dataset.realizations == 0
            || self.dataset.noisy_per_realization == 0
            || self.dataset.snr_train_db.is_empty()
        {
            return Err(CliError::Config(
                "dataset needs realizations, noisy copies, and at least one SNR_Train".into(),
            ));
        }
        Ok(())
    }

    pub fn stops(&self) -> PipelineStops {
        PipelineStops {
            fp: self.fp_stop,
            mm: self.mm_stop,
        }
    }
}
