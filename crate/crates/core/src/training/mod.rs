//! Loss, gradients, and the optimizer for the unrolled decoder.

mod backward;
mod rmsprop;

pub use backward::{backward, bce_multiloss, finite_diff_grad, Backprop, OUTPUT_CLAMP};
pub use rmsprop::{OptimizerState, RmsPropConfig};

use rayon::prelude::*;

use crate::decoder::{GradientSet, TannerGraph, WeightSet};
use crate::error::Result;

/// Samples per parallel work unit. Gradients are summed within a chunk and
/// the chunk sums are added in order, so results do not depend on thread count.
const CHUNK: usize = 64;

/// Mean loss and mean gradient over a batch of all-zero-codeword samples.
pub fn batch_gradient<L: AsRef<[f64]> + Sync>(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambdas: &[L],
    clip: f64,
) -> Result<(f64, GradientSet)> {
    let zeros = vec![0u8; graph.n_vars()];
    let partials: Vec<Result<(f64, GradientSet)>> = lambdas
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut bp = Backprop::new(graph, weights.layers());
            let mut loss = 0.0;
            let mut grads = GradientSet::zeros(weights.shape());
            for lambda in chunk {
                loss += bp.accumulate(graph, weights, lambda.as_ref(), &zeros, clip, &mut grads)?;
            }
            Ok((loss, grads))
        })
        .collect();
    let mut loss = 0.0;
    let mut grads = GradientSet::zeros(weights.shape());
    for p in partials {
        let (l, g) = p?;
        loss += l;
        grads.add_assign(&g);
    }
    let scale = 1.0 / lambdas.len().max(1) as f64;
    grads.scale(scale);
    Ok((loss * scale, grads))
}

/// Mean multiloss over a set of all-zero-codeword samples.
pub fn mean_loss<L: AsRef<[f64]> + Sync>(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambdas: &[L],
    clip: f64,
) -> Result<f64> {
    let zeros = vec![0u8; graph.n_vars()];
    let partials: Vec<Result<f64>> = lambdas
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut trace = crate::decoder::DecodeTrace::new(graph, weights.layers());
            let mut sum = 0.0;
            for lambda in chunk {
                crate::decoder::wbp_forward_into(graph, weights, lambda.as_ref(), clip, &mut trace)?;
                sum += bce_multiloss(&trace, &zeros);
            }
            Ok(sum)
        })
        .collect();
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    Ok(total / lambdas.len().max(1) as f64)
}
