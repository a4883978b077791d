//! Unrolled weighted belief propagation.
//!
//! Layer `l` (0-based here) computes, for every edge `e = (v, c)`:
//!
//! ```text
//! vn[l][e]  = tanh(0.5 * (wc[l][v] * lambda[v] + sum_{e' in N(v) \ e} we[l][e'] * cn[l-1][e']))
//! cn[l][e]  = clip(2 * atanh(clamp(prod_{e' in N(c) \ e} vn[l][e'])))
//! xhat[l][v] = sigmoid(-(oc[l][v] * lambda[v] + sum_{e in N(v)} oe[l][e] * cn[l][e]))
//! ```
//!
//! with `cn[-1] = 0`. `xhat` is the probability that bit `v` is 1.

mod ml;
mod tanner;
mod weights;

pub use ml::ml_decode;
pub use tanner::{build_tanner, TannerGraph};
pub use weights::{GradientSet, ParamShape, WeightSet};

use crate::channel::llr_all_zero;
use crate::error::{Error, Result};

/// Products fed to `atanh` are kept inside `[-1 + PRODUCT_MARGIN, 1 - PRODUCT_MARGIN]`.
pub const PRODUCT_MARGIN: f64 = 1e-12;

/// Default message clipping range, `(-10, 10)`.
pub const DEFAULT_CLIP: f64 = 10.0;

/// Every intermediate value of one forward pass, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    layers: usize,
    n: usize,
    edges: usize,
    /// Variable-to-check messages in the tanh domain, `L x E`.
    pub vn_messages: Vec<f64>,
    /// Check-to-variable LLR messages after clipping, `L x E`.
    pub cn_messages: Vec<f64>,
    /// Clamped product entering `atanh`, `L x E`.
    pub(crate) cn_products: Vec<f64>,
    /// Whether the check update is locally differentiable (no clamp or clip hit).
    pub(crate) cn_active: Vec<bool>,
    /// Soft outputs, `L x n`.
    pub x_hat: Vec<f64>,
}

impl DecodeTrace {
    pub fn new(graph: &TannerGraph, layers: usize) -> Self {
        let (n, edges) = (graph.n_vars(), graph.n_edges());
        Self {
            layers,
            n,
            edges,
            vn_messages: vec![0.0; layers * edges],
            cn_messages: vec![0.0; layers * edges],
            cn_products: vec![0.0; layers * edges],
            cn_active: vec![true; layers * edges],
            x_hat: vec![0.5; layers * n],
        }
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn vn(&self, l: usize) -> &[f64] {
        &self.vn_messages[l * self.edges..(l + 1) * self.edges]
    }

    pub fn cn(&self, l: usize) -> &[f64] {
        &self.cn_messages[l * self.edges..(l + 1) * self.edges]
    }

    /// Soft output of 0-based layer `l`.
    pub fn output(&self, l: usize) -> &[f64] {
        &self.x_hat[l * self.n..(l + 1) * self.n]
    }

    /// Soft output of the final layer.
    pub fn final_output(&self) -> &[f64] {
        self.output(self.layers - 1)
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_inputs(graph: &TannerGraph, weights: &WeightSet, lambda: &[f64], clip: f64) -> Result<()> {
    weights.shape().check_graph(graph)?;
    if lambda.len() != graph.n_vars() {
        return Err(Error::Dimension {
            what: "LLR vector length",
            expected: graph.n_vars(),
            got: lambda.len(),
        });
    }
    if weights.layers() == 0 {
        return Err(Error::InvalidArgument("need at least one layer".into()));
    }
    if !(clip > 0.0) {
        return Err(Error::InvalidArgument(format!("clip {clip} must be positive")));
    }
    Ok(())
}

/// Runs the network, writing every layer into `trace`.
pub fn wbp_forward_into(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambda: &[f64],
    clip: f64,
    trace: &mut DecodeTrace,
) -> Result<()> {
    check_inputs(graph, weights, lambda, clip)?;
    let layers = weights.layers();
    if trace.layers != layers || trace.edges != graph.n_edges() || trace.n != graph.n_vars() {
        *trace = DecodeTrace::new(graph, layers);
    }
    let (n, edges) = (graph.n_vars(), graph.n_edges());
    for l in 0..layers {
        let (wc, we) = (weights.vn_channel(l), weights.vn_edge(l));
        let (done, rest) = trace.cn_messages.split_at_mut(l * edges);
        let prev_cn = (l > 0).then(|| &done[(l - 1) * edges..]);
        let cn = &mut rest[..edges];
        let vn = &mut trace.vn_messages[l * edges..(l + 1) * edges];

        for v in 0..n {
            let ve = graph.var_edges(v);
            let base = wc[v] * lambda[v];
            for &e in ve {
                let mut acc = base;
                if let Some(prev) = prev_cn {
                    for &e2 in ve {
                        if e2 != e {
                            acc += we[e2] * prev[e2];
                        }
                    }
                }
                vn[e] = (0.5 * acc).tanh();
            }
        }

        let products = &mut trace.cn_products[l * edges..(l + 1) * edges];
        let active = &mut trace.cn_active[l * edges..(l + 1) * edges];
        for c in 0..graph.n_checks() {
            let ce = graph.check_edges(c);
            for &e in ce {
                let mut prod = 1.0;
                for &e2 in ce {
                    if e2 != e {
                        prod *= vn[e2];
                    }
                }
                let p = prod.clamp(-1.0 + PRODUCT_MARGIN, 1.0 - PRODUCT_MARGIN);
                let m = 2.0 * p.atanh();
                let mc = m.clamp(-clip, clip);
                products[e] = p;
                active[e] = p == prod && mc == m;
                cn[e] = mc;
            }
        }

        let (oc, oe) = (weights.out_channel(l), weights.out_edge(l));
        let out = &mut trace.x_hat[l * n..(l + 1) * n];
        for v in 0..n {
            let mut s = oc[v] * lambda[v];
            for &e in graph.var_edges(v) {
                s += oe[e] * cn[e];
            }
            out[v] = sigmoid(-s);
        }
    }
    Ok(())
}

pub fn wbp_forward(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambda: &[f64],
    clip: f64,
) -> Result<DecodeTrace> {
    let mut trace = DecodeTrace::new(graph, weights.layers());
    wbp_forward_into(graph, weights, lambda, clip, &mut trace)?;
    Ok(trace)
}

/// Bit `v` is 1 iff `x_hat[v] > 0.5`.
pub fn hard_decision(x_hat: &[f64]) -> Vec<u8> {
    x_hat.iter().map(|&x| (x > 0.5) as u8).collect()
}

/// Whether decoding the all-zero codeword received with noise `z` fails.
pub fn error_indicator(
    graph: &TannerGraph,
    weights: &WeightSet,
    z: &[f64],
    sigma: f64,
    clip: f64,
) -> Result<bool> {
    let trace = wbp_forward(graph, weights, &llr_all_zero(z, sigma), clip)?;
    Ok(trace.final_output().iter().any(|&x| x > 0.5))
}

/// A graph, weights, and clip range bundled for repeated decoding.
#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a> {
    pub graph: &'a TannerGraph,
    pub weights: &'a WeightSet,
    pub clip: f64,
}

impl<'a> Decoder<'a> {
    pub fn new(graph: &'a TannerGraph, weights: &'a WeightSet, clip: f64) -> Result<Self> {
        weights.shape().check_graph(graph)?;
        if !(clip > 0.0) {
            return Err(Error::InvalidArgument(format!("clip {clip} must be positive")));
        }
        Ok(Self { graph, weights, clip })
    }

    pub fn trace(&self) -> DecodeTrace {
        DecodeTrace::new(self.graph, self.weights.layers())
    }

    /// Number of bit errors against the all-zero codeword; `trace` is scratch space.
    pub fn bit_errors_all_zero(&self, lambda: &[f64], trace: &mut DecodeTrace) -> Result<usize> {
        wbp_forward_into(self.graph, self.weights, lambda, self.clip, trace)?;
        Ok(trace.final_output().iter().filter(|&&x| x > 0.5).count())
    }

    pub fn decode(&self, lambda: &[f64]) -> Result<Vec<u8>> {
        let trace = wbp_forward(self.graph, self.weights, lambda, self.clip)?;
        Ok(hard_decision(trace.final_output()))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::codes::fixtures;

    fn setup(pcm: crate::codes::ParityCheckMatrix, layers: usize) -> (TannerGraph, WeightSet) {
        let g = TannerGraph::new(&pcm);
        let w = WeightSet::unit(&g, layers);
        (g, w)
    }

    #[test]
    fn zero_llr_gives_half() {
        let (g, w) = setup(fixtures::hamming_7_4(), 5);
        let t = wbp_forward(&g, &w, &[0.0; 7], DEFAULT_CLIP).unwrap();
        assert!(t.vn_messages.iter().all(|&x| x == 0.0));
        assert!(t.cn_messages.iter().all(|&x| x == 0.0));
        assert!(t.x_hat.iter().all(|&x| x == 0.5));
        assert_eq!(hard_decision(t.final_output()), vec![0; 7]);
    }

    #[test]
    fn noiseless_hamming_decodes_to_zero() {
        let (g, w) = setup(fixtures::hamming_7_4(), 5);
        let t = wbp_forward(&g, &w, &[2.0; 7], DEFAULT_CLIP).unwrap();
        assert_eq!(hard_decision(t.final_output()), vec![0; 7]);
        assert!(t.final_output().iter().all(|&x| x < 0.5));
        assert!(!error_indicator(&g, &w, &[0.0; 7], 1.0, DEFAULT_CLIP).unwrap());
    }

    #[test]
    fn repetition_code_indicator() {
        let (g, w) = setup(fixtures::repetition_3(), 5);
        // LLRs (-1, 2, 2): the majority still favours zero.
        assert!(!error_indicator(&g, &w, &[-1.5, 0.0, 0.0], 1.0, DEFAULT_CLIP).unwrap());
        assert!(error_indicator(&g, &w, &[-10.0; 3], 1.0, DEFAULT_CLIP).unwrap());
        let (g, w) = setup(fixtures::repetition_3(), 5);
        let bits = Decoder::new(&g, &w, DEFAULT_CLIP)
            .unwrap()
            .decode(&crate::channel::llr(&[-9.0; 3], 1.0))
            .unwrap();
        assert_eq!(bits, vec![1, 1, 1]);
    }

    #[test]
    fn hard_decision_ties_to_zero() {
        assert_eq!(hard_decision(&[0.1, 0.9]), vec![0, 1]);
        assert_eq!(hard_decision(&[0.5; 4]), vec![0; 4]);
        assert_eq!(hard_decision(&[sigmoid(-3.0)]), vec![0]);
    }

    #[test]
    fn dimension_errors() {
        let (g, w) = setup(fixtures::hamming_7_4(), 2);
        assert!(wbp_forward(&g, &w, &[0.0; 6], 10.0).is_err());
        assert!(wbp_forward(&g, &w, &[0.0; 7], 0.0).is_err());
        let other = TannerGraph::new(&fixtures::bch_15_7());
        assert!(wbp_forward(&other, &w, &[0.0; 15], 10.0).is_err());
    }

    #[test]
    fn adversarial_llrs_stay_finite() {
        let (g, w) = setup(fixtures::bch_15_7(), 5);
        let lambda: Vec<f64> = (0..15).map(|i| if i % 2 == 0 { 1e6 } else { -1e6 }).collect();
        let t = wbp_forward(&g, &w, &lambda, DEFAULT_CLIP).unwrap();
        assert!(t.cn_messages.iter().all(|x| x.abs() <= DEFAULT_CLIP));
        assert!(t.vn_messages.iter().chain(&t.x_hat).all(|x| x.is_finite()));
    }

    proptest! {
        #[test]
        fn never_produces_non_finite(lambda in prop::collection::vec(-1e6f64..1e6, 15), scale in prop::sample::select(vec![1e-3, 1.0, 1e3])) {
            let (g, mut w) = setup(fixtures::bch_15_7(), 3);
            w.values_mut().iter_mut().enumerate().for_each(|(i, x)| *x = scale * (1.0 + (i % 7) as f64 * 0.1));
            let t = wbp_forward(&g, &w, &lambda, DEFAULT_CLIP).unwrap();
            prop_assert!(t.vn_messages.iter().all(|x| x.is_finite() && x.abs() <= 1.0));
            prop_assert!(t.cn_messages.iter().all(|x| x.is_finite() && x.abs() <= DEFAULT_CLIP));
            prop_assert!(t.x_hat.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x)));
        }

        #[test]
        fn negation_symmetry(lambda in prop::collection::vec(-4.0f64..4.0, 7)) {
            let (g, w) = setup(fixtures::hamming_7_4(), 4);
            let neg: Vec<f64> = lambda.iter().map(|x| -x).collect();
            let a = wbp_forward(&g, &w, &lambda, DEFAULT_CLIP).unwrap();
            let b = wbp_forward(&g, &w, &neg, DEFAULT_CLIP).unwrap();
            for (x, y) in a.vn_messages.iter().zip(&b.vn_messages) {
                prop_assert!((x + y).abs() < 1e-12);
            }
            for (x, y) in a.cn_messages.iter().zip(&b.cn_messages) {
                prop_assert!((x + y).abs() < 1e-9);
            }
            for (x, y) in a.x_hat.iter().zip(&b.x_hat) {
                prop_assert!((x + y - 1.0).abs() < 1e-9);
            }
        }
    }
}
