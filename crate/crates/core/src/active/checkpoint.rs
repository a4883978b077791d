//! Per-iteration checkpoint directories.
//!
//! `iter_NNN/` holds `weights.bin`, `best_weights.bin`, `optimizer.bin` (the
//! RMSProp accumulators in the weight-file layout), `state.json`, and
//! `theta_raw_snrI.csv` / `theta_filled_snrI.csv` per training SNR. Every file
//! is a pure function of the config and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ActiveState, IterationRecord, SnrState, TrainRunConfig, Validation};
use crate::codes::CodeSpec;
use crate::decoder::WeightSet;
use crate::error::{Error, Result};
use crate::shells::{tilted_pmf, ThetaProfile};
use crate::training::{OptimizerState, RmsPropConfig};

pub const CHECKPOINT_FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnrSnapshot {
    snr_db: f64,
    theta_raw: ThetaProfile,
    theta: ThetaProfile,
    fallback: bool,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    format: u32,
    config: TrainRunConfig,
    iteration: usize,
    best_iteration: usize,
    best_validation_loss: f64,
    stale: usize,
    unit_validation: Validation,
    optimizer: RmsPropConfig,
    snrs: Vec<SnrSnapshot>,
    history: Vec<IterationRecord>,
}

pub fn checkpoint_dir(root: &Path, iteration: usize) -> PathBuf {
    root.join(format!("iter_{iteration:03}"))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `root/iter_NNN` for the state's current iteration and returns its path.
pub fn save_checkpoint(root: &Path, config: &TrainRunConfig, state: &ActiveState) -> Result<PathBuf> {
    let dir = checkpoint_dir(root, state.iteration);
    let tmp = root.join(format!(".iter_{:03}.partial", state.iteration));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;

    state.weights.save(&tmp.join("weights.bin"))?;
    state.best_weights.save(&tmp.join("best_weights.bin"))?;
    WeightSet::from_values(state.weights.shape(), state.optimizer.mean_square.clone())?
        .save(&tmp.join("optimizer.bin"))?;
    for (i, snr) in state.snrs.iter().enumerate() {
        snr.theta_raw.write_csv(&snr.partition, &tmp.join(format!("theta_raw_snr{i}.csv")))?;
        snr.theta.write_csv(&snr.partition, &tmp.join(format!("theta_filled_snr{i}.csv")))?;
    }
    let file = StateFile {
        format: CHECKPOINT_FORMAT,
        config: config.clone(),
        iteration: state.iteration,
        best_iteration: state.best_iteration,
        best_validation_loss: state.best_validation_loss,
        stale: state.stale,
        unit_validation: state.unit_validation,
        optimizer: state.optimizer.config,
        snrs: state
            .snrs
            .iter()
            .map(|s| SnrSnapshot {
                snr_db: s.snr_db,
                theta_raw: s.theta_raw.clone(),
                theta: s.theta.clone(),
                fallback: s.fallback,
            })
            .collect(),
        history: state.history.clone(),
    };
    let mut json = serde_json::to_string_pretty(&file).expect("state serializes");
    json.push('\n');
    write(&tmp.join("state.json"), json.as_bytes())?;

    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    fs::rename(&tmp, &dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Reads a checkpoint written by [`save_checkpoint`]. The sampling laws are
/// rebuilt from the stored profiles exactly as the loop built them.
pub fn load_checkpoint(dir: &Path, code: &CodeSpec, config: &TrainRunConfig) -> Result<ActiveState> {
    let state_path = dir.join("state.json");
    let text = fs::read_to_string(&state_path).map_err(|e| Error::io(&state_path, e))?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| Error::format(&state_path, e.to_string()))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::format(&state_path, format!("unsupported format {}", file.format)));
    }
    if file.config.resume_key() != config.resume_key() {
        return Err(Error::Config {
            path: String::new(),
            message: format!("checkpoint {} was written with a different config", dir.display()),
        });
    }
    if file.snrs.len() != config.snr_list_db.len() {
        return Err(Error::format(&state_path, "SNR count differs from config"));
    }

    let weights = WeightSet::load(&dir.join("weights.bin"))?;
    let best_weights = WeightSet::load(&dir.join("best_weights.bin"))?;
    let acc = WeightSet::load(&dir.join("optimizer.bin"))?;
    if best_weights.shape() != weights.shape() || acc.shape() != weights.shape() {
        return Err(Error::format(dir, "weight files disagree in shape"));
    }

    let mut snrs = Vec::with_capacity(file.snrs.len());
    for (snap, &snr_db) in file.snrs.into_iter().zip(&config.snr_list_db) {
        let mut s = SnrState::new(code.n(), code.rate(), snr_db, config)?;
        if snap.theta.theta.len() != s.partition.len() || snap.theta_raw.theta.len() != s.partition.len() {
            return Err(Error::format(&state_path, "theta profile length differs from shell count"));
        }
        if !config.freeze_theta && !snap.fallback {
            s.sampling = tilted_pmf(&s.base, &snap.theta.theta)?;
        }
        s.theta_raw = snap.theta_raw;
        s.theta = snap.theta;
        s.fallback = snap.fallback;
        snrs.push(s);
    }

    Ok(ActiveState {
        snrs,
        optimizer: OptimizerState { config: file.optimizer, mean_square: acc.values().to_vec() },
        weights,
        best_weights,
        iteration: file.iteration,
        best_iteration: file.best_iteration,
        best_validation_loss: file.best_validation_loss,
        stale: file.stale,
        unit_validation: file.unit_validation,
        history: file.history,
    })
}
