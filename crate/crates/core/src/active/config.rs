use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::RmsPropConfig;

mod defaults {
    pub fn shells() -> usize {
        400
    }
    pub fn gamma() -> f64 {
        0.7
    }
    pub fn layers() -> usize {
        5
    }
    pub fn clip() -> f64 {
        10.0
    }
    pub fn batches_per_epoch() -> usize {
        31
    }
    pub fn epsilon_tail() -> f64 {
        1e-6
    }
    pub fn tail_extend() -> usize {
        5
    }
    pub fn patience() -> usize {
        2
    }
    pub fn learning_rate() -> f64 {
        0.01
    }
    pub fn decay() -> f64 {
        0.99
    }
    pub fn epsilon() -> f64 {
        1e-8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    /// Learning rate from the midpoint of the epoch budget on; unset keeps it constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_learning_rate: Option<f64>,
    #[serde(default = "defaults::decay")]
    pub decay: f64,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: defaults::learning_rate(),
            final_learning_rate: None,
            decay: defaults::decay(),
            epsilon: defaults::epsilon(),
        }
    }
}

impl OptimizerConfig {
    pub fn rmsprop(&self) -> RmsPropConfig {
        RmsPropConfig { learning_rate: self.learning_rate, decay: self.decay, epsilon: self.epsilon }
    }

    /// Learning rate for global epoch `epoch` out of `total`.
    pub fn learning_rate_at(&self, epoch: usize, total: usize) -> f64 {
        match self.final_learning_rate {
            Some(lr) if 2 * epoch >= total => lr,
            _ => self.learning_rate,
        }
    }
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    /// Built-in fixture name or path to an alist file.
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<usize>,
    /// Training SNRs (Eb/N0, dB). Each keeps its own shells and error ratios.
    pub snr_list_db: Vec<f64>,
    /// Shell count M.
    #[serde(default = "defaults::shells")]
    pub shells: usize,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    /// Decoder iterations L.
    #[serde(default = "defaults::layers")]
    pub layers: usize,
    #[serde(default = "defaults::clip")]
    pub clip: f64,
    pub batch_size: usize,
    #[serde(default = "defaults::batches_per_epoch")]
    pub batches_per_epoch: usize,
    /// N2.
    pub epochs_per_outer: usize,
    /// N1.
    pub max_outer_iters: usize,
    /// Error-ratio samples per SNR per outer iteration.
    pub theta_test_samples: usize,
    /// Size of the fixed validation set, split across SNRs.
    pub validation_samples: usize,
    /// Chi tail mass left outside the shell range.
    #[serde(default = "defaults::epsilon_tail")]
    pub epsilon_tail: f64,
    #[serde(default = "defaults::tail_extend")]
    pub tail_extend: usize,
    /// Outer iterations without validation improvement before stopping.
    #[serde(default = "defaults::patience")]
    pub patience: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Keep theta = 1 (sample from the untilted Chi law) every iteration.
    #[serde(default)]
    pub freeze_theta: bool,
    #[serde(default)]
    pub seed: u64,
}

fn bad(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl TrainRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_list_db.is_empty() {
            return Err(bad("snr_list_db", "must not be empty"));
        }
        if let Some(s) = self.snr_list_db.iter().find(|s| !s.is_finite()) {
            return Err(bad("snr_list_db", format!("{s} is not finite")));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(bad("gamma", format!("{} not in (0, 1]", self.gamma)));
        }
        if self.shells < 2 {
            return Err(bad("shells", "need at least 2"));
        }
        for (name, v) in [
            ("layers", self.layers),
            ("batch_size", self.batch_size),
            ("batches_per_epoch", self.batches_per_epoch),
            ("epochs_per_outer", self.epochs_per_outer),
            ("theta_test_samples", self.theta_test_samples),
            ("validation_samples", self.validation_samples),
            ("patience", self.patience),
        ] {
            if v == 0 {
                return Err(bad(name, "must be positive"));
            }
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return Err(bad("clip", "must be positive"));
        }
        if !(self.epsilon_tail > 0.0 && self.epsilon_tail < 0.1) {
            return Err(bad("epsilon_tail", format!("{} not in (0, 0.1)", self.epsilon_tail)));
        }
        let o = &self.optimizer;
        let lr_ok = |lr: f64| lr > 0.0 && lr.is_finite();
        if !lr_ok(o.learning_rate) {
            return Err(bad("optimizer.learning_rate", "must be positive"));
        }
        if o.final_learning_rate.is_some_and(|lr| !lr_ok(lr)) {
            return Err(bad("optimizer.final_learning_rate", "must be positive"));
        }
        if !(o.decay > 0.0 && o.decay < 1.0) {
            return Err(bad("optimizer.decay", "must be in (0, 1)"));
        }
        if !(o.epsilon > 0.0) {
            return Err(bad("optimizer.epsilon", "must be positive"));
        }
        if self.d_min == Some(0) {
            return Err(bad("d_min", "must be positive"));
        }
        Ok(())
    }

    /// Parses TOML; unknown or mistyped keys are reported with their path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| bad("", e.message().to_string()))?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(&path, e.into_inner().message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Samples generated per outer iteration.
    pub fn samples_per_outer(&self) -> usize {
        self.batch_size * self.batches_per_epoch
    }

    /// Fields that may change when a run is resumed.
    pub(crate) fn resume_key(&self) -> Self {
        Self { max_outer_iters: 0, patience: 1, ..self.clone() }
    }
}
