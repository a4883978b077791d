//! Monte Carlo error rates and the binary entropy of error ratios.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel::{awgn_noise, llr_all_zero, snr_to_sigma};
use crate::decoder::Decoder;
use crate::error::{Error, Result};
use crate::rng::{derive, stream, Purpose};

/// Blocks per random stream. Fixed so results do not depend on worker count.
pub const EVAL_CHUNK: u64 = 1024;

/// Why a Monte Carlo run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Reached the requested number of block errors.
    Converged,
    /// Ran out of blocks first.
    BudgetBound,
    /// No blocks were decoded.
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorStats {
    pub snr_db: f64,
    pub n: usize,
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub stop: StopReason,
}

impl ErrorStats {
    pub fn fer(&self) -> f64 {
        if self.blocks == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.blocks as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.blocks == 0 {
            0.0
        } else {
            self.bit_errors as f64 / (self.blocks as f64 * self.n as f64)
        }
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// Binomial standard error of the BER estimate.
    pub fn ber_sigma(&self) -> f64 {
        let trials = self.blocks as f64 * self.n as f64;
        if trials == 0.0 {
            return 0.0;
        }
        let p = self.ber();
        (p * (1.0 - p) / trials).sqrt()
    }
}

/// Stopping rule: run until `min_block_errors` or `max_blocks`, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Budget {
    pub min_block_errors: u64,
    pub max_blocks: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { min_block_errors: 100, max_blocks: 100_000_000 }
    }
}

/// Simulates the all-zero codeword at one SNR.
///
/// The noise for chunk `c` comes from a stream keyed by `(seed, snr_db, c)`,
/// and per-block results are folded in block order, so the stopping point and
/// counts are the same for any number of workers.
pub fn monte_carlo_errors(
    decoder: &Decoder<'_>,
    rate: f64,
    snr_db: f64,
    budget: Budget,
    seed: u64,
) -> Result<ErrorStats> {
    if budget.min_block_errors == 0 {
        return Err(Error::InvalidArgument("min_block_errors must be at least 1".into()));
    }
    let sigma = snr_to_sigma(snr_db, rate)?;
    let n = decoder.graph.n_vars();
    let point_seed = derive(seed, snr_db.to_bits());
    let mut stats =
        ErrorStats { snr_db, n, blocks: 0, block_errors: 0, bit_errors: 0, stop: StopReason::Invalid };
    if budget.max_blocks == 0 {
        return Ok(stats);
    }
    let total_chunks = budget.max_blocks.div_ceil(EVAL_CHUNK);
    let wave = 4 * rayon::current_num_threads().max(1) as u64;
    let mut next = 0u64;
    while next < total_chunks {
        let end = (next + wave).min(total_chunks);
        let results: Vec<Result<Vec<u32>>> = (next..end)
            .into_par_iter()
            .map(|c| {
                let lo = c * EVAL_CHUNK;
                let hi = (lo + EVAL_CHUNK).min(budget.max_blocks);
                let mut rng = stream(point_seed, Purpose::Evaluation, c);
                let mut trace = decoder.trace();
                (lo..hi)
                    .map(|_| {
                        let lambda = llr_all_zero(&awgn_noise(n, sigma, &mut rng), sigma);
                        decoder.bit_errors_all_zero(&lambda, &mut trace).map(|e| e as u32)
                    })
                    .collect()
            })
            .collect();
        for chunk in results {
            for errors in chunk? {
                stats.blocks += 1;
                if errors > 0 {
                    stats.block_errors += 1;
                    stats.bit_errors += u64::from(errors);
                    if stats.block_errors >= budget.min_block_errors {
                        stats.stop = StopReason::Converged;
                        return Ok(stats);
                    }
                }
            }
        }
        next = end;
    }
    stats.stop = StopReason::BudgetBound;
    Ok(stats)
}

/// [`monte_carlo_errors`] at every grid point, same seed for each.
pub fn sweep(
    decoder: &Decoder<'_>,
    rate: f64,
    snr_grid: &[f64],
    budget: Budget,
    seed: u64,
) -> Result<Vec<ErrorStats>> {
    if snr_grid.is_empty() {
        return Err(Error::InvalidArgument("empty SNR grid".into()));
    }
    snr_grid.iter().map(|&snr| monte_carlo_errors(decoder, rate, snr, budget, seed)).collect()
}

pub const STATS_CSV_HEADER: &str = "snr_db,blocks,block_errors,bit_errors,fer,ber,converged";

/// CSV with header [`STATS_CSV_HEADER`]; reals in shortest round-trip form.
pub fn stats_to_csv(stats: &[ErrorStats]) -> String {
    let mut out = String::from(STATS_CSV_HEADER);
    out.push('\n');
    for s in stats {
        let _ = writeln!(
            out,
            "{:?},{},{},{},{:?},{:?},{}",
            s.snr_db,
            s.blocks,
            s.block_errors,
            s.bit_errors,
            s.fer(),
            s.ber(),
            s.converged() as u8
        );
    }
    out
}

/// Binary entropy in bits, `H(0) = H(1) = 0`.
pub fn theta_entropy(theta: f64) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    h(theta) + h(1.0 - theta)
}
