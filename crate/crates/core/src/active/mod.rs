//! The active training loop: estimate per-shell error ratios with the current
//! decoder, retilt the radial sampling law toward informative shells, train,
//! repeat.

mod checkpoint;
mod config;

pub use checkpoint::{checkpoint_dir, load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT};
pub use config::{OptimizerConfig, TrainRunConfig};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn_noise, llr_all_zero, snr_to_sigma};
use crate::codes::CodeSpec;
use crate::decoder::{wbp_forward_into, DecodeTrace, Decoder, TannerGraph, WeightSet};
use crate::error::{Error, Result};
use crate::rng::{derive, stream, Purpose, Rng};
use crate::shells::{tilted_pmf, RadialPmf, ShellCount, ShellPartition, ShellSampler, ThetaProfile};
use crate::training::{batch_gradient, OptimizerState};

/// Samples per random stream when generating data in parallel.
const GEN_CHUNK: usize = 1024;

/// Generates `count` items in parallel; item `i` comes from stream
/// `(seed, purpose, i / GEN_CHUNK)`, so output is independent of thread count.
fn par_generate<T: Send>(
    count: usize,
    seed: u64,
    purpose: Purpose,
    f: impl Fn(&mut Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let chunks: Vec<Result<Vec<T>>> = (0..count.div_ceil(GEN_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, purpose, c as u64);
            let len = GEN_CHUNK.min(count - c * GEN_CHUNK);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Splits `total` across `parts` as evenly as possible, remainder to the first.
fn split_even(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

/// Shell state for one training SNR.
#[derive(Debug, Clone)]
pub struct SnrState {
    pub snr_db: f64,
    pub sigma: f64,
    pub partition: ShellPartition,
    /// Untilted shell masses P.
    pub base: RadialPmf,
    /// Last raw estimate.
    pub theta_raw: ThetaProfile,
    /// Filled and thresholded profile that defines `sampling`.
    pub theta: ThetaProfile,
    /// Current sampling law P* (or P after a fallback).
    pub sampling: RadialPmf,
    /// Set when the filled profile was all zero and sampling fell back to P.
    pub fallback: bool,
}

impl SnrState {
    pub fn new(n: usize, rate: f64, snr_db: f64, config: &TrainRunConfig) -> Result<Self> {
        let sigma = snr_to_sigma(snr_db, rate)?;
        let partition = ShellPartition::build(n, sigma, config.shells, config.epsilon_tail)?;
        let base = partition.shell_masses();
        Ok(Self {
            snr_db,
            sigma,
            theta_raw: ThetaProfile::ones(config.shells, config.gamma),
            theta: ThetaProfile::ones(config.shells, config.gamma),
            sampling: base.clone(),
            base,
            partition,
            fallback: false,
        })
    }

    /// Installs a new raw estimate: fill, threshold, retilt.
    pub fn update(&mut self, raw: ThetaProfile, tail_extend: usize) {
        let filled = raw.filled(&self.partition, tail_extend);
        match tilted_pmf(&self.base, &filled.theta) {
            Ok(p) => {
                self.sampling = p;
                self.fallback = false;
            }
            Err(_) => {
                self.sampling = self.base.clone();
                self.fallback = true;
            }
        }
        self.theta_raw = raw;
        self.theta = filled;
    }
}

/// One training example: channel LLRs for the all-zero codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub lambda: Vec<f64>,
    pub snr_index: usize,
    pub shell: usize,
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.lambda
    }
}

/// Draws `count` samples split evenly across SNRs, each from that SNR's
/// current sampling law.
pub fn build_training_batch(snrs: &[SnrState], count: usize, seed: u64) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(count);
    for (i, (snr, k)) in snrs.iter().zip(split_even(count, snrs.len())).enumerate() {
        let sampler = ShellSampler::new(&snr.partition, &snr.sampling)?;
        out.extend(par_generate(k, derive(seed, i as u64), Purpose::Training, |rng| {
            let (z, shell) = sampler.sample(rng);
            Ok(Sample { lambda: llr_all_zero(&z, snr.sigma), snr_index: i, shell })
        })?);
    }
    Ok(out)
}

/// Monte Carlo error ratio per shell: `num_samples` draws from `sampling`,
/// a block error counted when any hard decision is wrong.
pub fn estimate_theta(
    decoder: &Decoder<'_>,
    partition: &ShellPartition,
    sampling: &RadialPmf,
    num_samples: usize,
    sigma: f64,
    gamma: f64,
    seed: u64,
) -> Result<ThetaProfile> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let sampler = ShellSampler::new(partition, sampling)?;
    let outcomes = par_generate(num_samples, seed, Purpose::ThetaEstimate, |rng| {
        let (z, shell) = sampler.sample(rng);
        let mut trace = decoder.trace();
        let errors = decoder.bit_errors_all_zero(&llr_all_zero(&z, sigma), &mut trace)?;
        Ok((shell, errors > 0))
    })?;
    let mut counts = vec![ShellCount::default(); partition.len()];
    for (shell, err) in outcomes {
        counts[shell].trials += 1;
        counts[shell].errors += u64::from(err);
    }
    Ok(ThetaProfile::from_counts(counts, gamma))
}

/// Loss and error rates on a fixed sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub loss: f64,
    pub ber: f64,
    pub fer: f64,
}

pub fn validate<L: AsRef<[f64]> + Sync>(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambdas: &[L],
    clip: f64,
) -> Result<Validation> {
    let zeros = vec![0u8; graph.n_vars()];
    let parts: Vec<Result<(f64, u64, u64)>> = lambdas
        .par_chunks(GEN_CHUNK)
        .map(|chunk| {
            let mut trace = DecodeTrace::new(graph, weights.layers());
            let (mut loss, mut bits, mut blocks) = (0.0, 0u64, 0u64);
            for lambda in chunk {
                wbp_forward_into(graph, weights, lambda.as_ref(), clip, &mut trace)?;
                loss += crate::training::bce_multiloss(&trace, &zeros);
                let e = trace.final_output().iter().filter(|&&x| x > 0.5).count() as u64;
                bits += e;
                blocks += u64::from(e > 0);
            }
            Ok((loss, bits, blocks))
        })
        .collect();
    let (mut loss, mut bits, mut blocks) = (0.0, 0u64, 0u64);
    for p in parts {
        let (l, b, f) = p?;
        loss += l;
        bits += b;
        blocks += f;
    }
    let count = lambdas.len().max(1) as f64;
    Ok(Validation {
        loss: loss / count,
        ber: bits as f64 / (count * graph.n_vars() as f64),
        fer: blocks as f64 / count,
    })
}

/// Plain AWGN (untilted) validation set, split evenly across SNRs.
pub fn validation_set(snrs: &[SnrState], n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    for (i, (snr, k)) in snrs.iter().zip(split_even(count, snrs.len())).enumerate() {
        out.extend(par_generate(k, derive(seed, i as u64), Purpose::Validation, |rng| {
            Ok(llr_all_zero(&awgn_noise(n, snr.sigma, rng), snr.sigma))
        })?);
    }
    Ok(out)
}

/// Per-SNR part of an [`IterationRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRecord {
    pub snr_db: f64,
    /// How many of this iteration's training samples fell in each shell.
    pub batch_shell_counts: Vec<u64>,
    pub theta_raw: Vec<f64>,
    pub theta_filled: Vec<f64>,
    /// Shells with positive mass under the sampling law for the next iteration.
    pub next_support: Vec<usize>,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub learning_rates: Vec<f64>,
    /// Mean training loss of each epoch, measured before each batch's update.
    pub epoch_losses: Vec<f64>,
    pub validation: Validation,
    pub improved: bool,
    pub snrs: Vec<SnrRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainStop {
    MaxIterations,
    NoImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Validation of the unit (plain BP) weights, the iteration-0 candidate.
    pub unit_validation: Validation,
    pub iterations: Vec<IterationRecord>,
    /// 0 means the unit weights were never beaten.
    pub best_iteration: usize,
    pub best_validation_loss: f64,
    pub stop: TrainStop,
}

/// Mutable state of a run between outer iterations.
#[derive(Debug, Clone)]
pub struct ActiveState {
    pub snrs: Vec<SnrState>,
    pub weights: WeightSet,
    pub optimizer: OptimizerState,
    /// Completed outer iterations T.
    pub iteration: usize,
    pub best_weights: WeightSet,
    pub best_iteration: usize,
    pub best_validation_loss: f64,
    /// Consecutive iterations without improvement.
    pub stale: usize,
    pub unit_validation: Validation,
    pub history: Vec<IterationRecord>,
}

/// Drives [`ActiveState`] one outer iteration at a time.
pub struct Trainer {
    config: TrainRunConfig,
    graph: TannerGraph,
    validation: Vec<Vec<f64>>,
    state: ActiveState,
}

impl Trainer {
    /// Fresh run: theta = 1, unit weights, sampling from the Chi law.
    pub fn new(code: &CodeSpec, config: &TrainRunConfig) -> Result<Self> {
        config.validate()?;
        let graph = TannerGraph::new(&code.pcm);
        let snrs = config
            .snr_list_db
            .iter()
            .map(|&s| SnrState::new(code.n(), code.rate(), s, config))
            .collect::<Result<Vec<_>>>()?;
        let validation = validation_set(&snrs, code.n(), config.validation_samples, config.seed)?;
        let weights = WeightSet::unit(&graph, config.layers);
        let unit_validation = validate(&graph, &weights, &validation, config.clip)?;
        let state = ActiveState {
            optimizer: OptimizerState::new(weights.shape(), config.optimizer.rmsprop()),
            best_weights: weights.clone(),
            weights,
            snrs,
            iteration: 0,
            best_iteration: 0,
            best_validation_loss: unit_validation.loss,
            stale: 0,
            unit_validation,
            history: Vec::new(),
        };
        Ok(Self { config: config.clone(), graph, validation, state })
    }

    /// Continues from a saved state; the config must match the one it was saved with
    /// apart from `max_outer_iters` and `patience`.
    pub fn resume(code: &CodeSpec, config: &TrainRunConfig, state: ActiveState) -> Result<Self> {
        let mut t = Self::new(code, config)?;
        state.weights.shape().check_graph(&t.graph)?;
        if state.snrs.len() != t.state.snrs.len() {
            return Err(Error::InvalidArgument("checkpoint SNR list differs from config".into()));
        }
        t.state = state;
        Ok(t)
    }

    pub fn state(&self) -> &ActiveState {
        &self.state
    }

    pub fn config(&self) -> &TrainRunConfig {
        &self.config
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    /// Why the loop should stop now, if it should.
    pub fn stop_reason(&self) -> Option<TrainStop> {
        if self.state.stale >= self.config.patience && self.state.iteration > 0 {
            Some(TrainStop::NoImprovement)
        } else if self.state.iteration >= self.config.max_outer_iters {
            Some(TrainStop::MaxIterations)
        } else {
            None
        }
    }

    /// Runs one outer iteration, or returns `None` when the loop is finished.
    pub fn step(&mut self) -> Result<Option<&IterationRecord>> {
        if self.stop_reason().is_some() {
            return Ok(None);
        }
        let cfg = &self.config;
        let st = &mut self.state;
        let t = st.iteration + 1;
        let iter_seed = derive(cfg.seed, t as u64);

        let samples = build_training_batch(&st.snrs, cfg.samples_per_outer(), iter_seed)?;
        let mut batch_shell_counts = vec![vec![0u64; cfg.shells]; st.snrs.len()];
        for s in &samples {
            batch_shell_counts[s.snr_index][s.shell] += 1;
        }

        let total_epochs = cfg.max_outer_iters * cfg.epochs_per_outer;
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut batch: Vec<&Sample> = Vec::with_capacity(cfg.batch_size);
        let mut learning_rates = Vec::with_capacity(cfg.epochs_per_outer);
        let mut epoch_losses = Vec::with_capacity(cfg.epochs_per_outer);
        for epoch in 0..cfg.epochs_per_outer {
            let lr = cfg.optimizer.learning_rate_at((t - 1) * cfg.epochs_per_outer + epoch, total_epochs);
            st.optimizer.set_learning_rate(lr);
            order.shuffle(&mut stream(iter_seed, Purpose::Training, (1 << 40) + epoch as u64));
            let mut loss_sum = 0.0;
            for idx in order.chunks(cfg.batch_size) {
                batch.clear();
                batch.extend(idx.iter().map(|&i| &samples[i]));
                let (loss, grads) = batch_gradient(&self.graph, &st.weights, &batch, cfg.clip)?;
                loss_sum += loss;
                st.optimizer.step(&mut st.weights, &grads);
            }
            learning_rates.push(lr);
            epoch_losses.push(loss_sum / cfg.batches_per_epoch as f64);
        }
        drop(samples);

        let validation = validate(&self.graph, &st.weights, &self.validation, cfg.clip)?;
        let improved = validation.loss < st.best_validation_loss;
        if improved {
            st.best_validation_loss = validation.loss;
            st.best_iteration = t;
            st.best_weights = st.weights.clone();
            st.stale = 0;
        } else {
            st.stale += 1;
        }

        let decoder = Decoder::new(&self.graph, &st.weights, cfg.clip)?;
        let mut snr_records = Vec::with_capacity(st.snrs.len());
        for (i, (snr, counts)) in st.snrs.iter_mut().zip(batch_shell_counts).enumerate() {
            let raw = estimate_theta(
                &decoder,
                &snr.partition,
                &snr.sampling,
                cfg.theta_test_samples,
                snr.sigma,
                cfg.gamma,
                derive(iter_seed, i as u64),
            )?;
            if cfg.freeze_theta {
                snr.theta_raw = raw;
            } else {
                snr.update(raw, cfg.tail_extend);
            }
            snr_records.push(SnrRecord {
                snr_db: snr.snr_db,
                batch_shell_counts: counts,
                theta_raw: snr.theta_raw.theta.clone(),
                theta_filled: snr.theta.theta.clone(),
                next_support: snr.sampling.support(),
                fallback: snr.fallback,
            });
        }

        st.iteration = t;
        st.history.push(IterationRecord {
            iteration: t,
            learning_rates,
            epoch_losses,
            validation,
            improved,
            snrs: snr_records,
        });
        Ok(st.history.last())
    }

    /// Best weights and the run report.
    pub fn finish(self) -> (WeightSet, RunReport) {
        let stop = self.stop_reason().unwrap_or(TrainStop::MaxIterations);
        let st = self.state;
        (
            st.best_weights,
            RunReport {
                unit_validation: st.unit_validation,
                iterations: st.history,
                best_iteration: st.best_iteration,
                best_validation_loss: st.best_validation_loss,
                stop,
            },
        )
    }
}

/// Runs the loop to completion without checkpoints.
pub fn active_train(code: &CodeSpec, config: &TrainRunConfig) -> Result<(WeightSet, RunReport)> {
    let mut trainer = Trainer::new(code, config)?;
    while trainer.step()?.is_some() {}
    Ok(trainer.finish())
}
