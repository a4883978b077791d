//! Reverse-mode differentiation of the multiloss through the unrolled network.

use crate::decoder::{wbp_forward_into, DecodeTrace, GradientSet, TannerGraph, WeightSet};
use crate::error::Result;

/// Soft outputs are clamped into `[OUTPUT_CLAMP, 1 - OUTPUT_CLAMP]` before the log.
pub const OUTPUT_CLAMP: f64 = 1e-12;

/// `-(1/n) sum_l sum_v [c_v ln xhat + (1 - c_v) ln(1 - xhat)]` over all layers.
pub fn bce_multiloss(trace: &DecodeTrace, codeword: &[u8]) -> f64 {
    let n = codeword.len() as f64;
    let mut total = 0.0;
    for l in 0..trace.layers() {
        for (&x, &c) in trace.output(l).iter().zip(codeword) {
            let x = x.clamp(OUTPUT_CLAMP, 1.0 - OUTPUT_CLAMP);
            total -= if c == 1 { x.ln() } else { (1.0 - x).ln() };
        }
    }
    total / n
}

/// Reusable buffers for forward + backward passes.
#[derive(Debug, Clone)]
pub struct Backprop {
    trace: DecodeTrace,
    g_cn: Vec<f64>,
    g_cn_prev: Vec<f64>,
    g_p: Vec<f64>,
    g_u: Vec<f64>,
    g_a: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    others: Vec<usize>,
}

impl Backprop {
    pub fn new(graph: &TannerGraph, layers: usize) -> Self {
        let e = graph.n_edges();
        let d = graph.max_check_degree() + 1;
        Self {
            trace: DecodeTrace::new(graph, layers),
            g_cn: vec![0.0; e],
            g_cn_prev: vec![0.0; e],
            g_p: vec![0.0; e],
            g_u: vec![0.0; e],
            g_a: vec![0.0; e],
            prefix: vec![0.0; d],
            suffix: vec![0.0; d],
            others: Vec::with_capacity(d),
        }
    }

    pub fn trace(&self) -> &DecodeTrace {
        &self.trace
    }

    /// Runs forward and backward for one sample, adds its gradient into
    /// `grads`, and returns its loss.
    pub fn accumulate(
        &mut self,
        graph: &TannerGraph,
        weights: &WeightSet,
        lambda: &[f64],
        codeword: &[u8],
        clip: f64,
        grads: &mut GradientSet,
    ) -> Result<f64> {
        wbp_forward_into(graph, weights, lambda, clip, &mut self.trace)?;
        let loss = bce_multiloss(&self.trace, codeword);
        let shape = weights.shape();
        let (n, edges) = (graph.n_vars(), graph.n_edges());
        let inv_n = 1.0 / n as f64;
        let g = grads.values_mut();
        self.g_cn.iter_mut().for_each(|x| *x = 0.0);

        for l in (0..weights.layers()).rev() {
            let cn = self.trace.cn(l);
            let vn = self.trace.vn(l);
            let x_hat = self.trace.output(l);

            // Soft-output layer: d loss / d s_v = (c_v - xhat_v) / n inside the clamp.
            let (oc_r, oe_r) = (shape.out_channel(l), shape.out_edge(l));
            let oe = weights.out_edge(l);
            for v in 0..n {
                let x = x_hat[v];
                if !(OUTPUT_CLAMP..=1.0 - OUTPUT_CLAMP).contains(&x) {
                    continue;
                }
                let ds = (codeword[v] as f64 - x) * inv_n;
                g[oc_r.start + v] += ds * lambda[v];
                for &e in graph.var_edges(v) {
                    g[oe_r.start + e] += ds * cn[e];
                    self.g_cn[e] += ds * oe[e];
                }
            }

            // Check layer: m = 2 atanh(p) where it was neither clamped nor clipped.
            let products = &self.trace.cn_products[l * edges..(l + 1) * edges];
            let active = &self.trace.cn_active[l * edges..(l + 1) * edges];
            for e in 0..edges {
                let p = products[e];
                self.g_p[e] = if active[e] { self.g_cn[e] * 2.0 / (1.0 - p * p) } else { 0.0 };
            }
            for c in 0..graph.n_checks() {
                let ce = graph.check_edges(c);
                for (j, &ej) in ce.iter().enumerate() {
                    self.others.clear();
                    self.others.extend(ce.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &e)| e));
                    let k = self.others.len();
                    self.prefix[0] = 1.0;
                    for t in 0..k {
                        self.prefix[t + 1] = self.prefix[t] * vn[self.others[t]];
                    }
                    self.suffix[k] = 1.0;
                    for t in (0..k).rev() {
                        self.suffix[t] = self.suffix[t + 1] * vn[self.others[t]];
                    }
                    // u_ej feeds every other edge's product; drop both factors.
                    let mut acc = 0.0;
                    for t in 0..k {
                        acc += self.g_p[self.others[t]] * self.prefix[t] * self.suffix[t + 1];
                    }
                    self.g_u[ej] = acc;
                }
            }

            // Variable layer: u = tanh(a / 2).
            for ((ga, &gu), &u) in self.g_a.iter_mut().zip(&self.g_u).zip(vn) {
                *ga = gu * 0.5 * (1.0 - u * u);
            }
            let (wc_r, we_r) = (shape.vn_channel(l), shape.vn_edge(l));
            let we = weights.vn_edge(l);
            self.g_cn_prev.iter_mut().for_each(|x| *x = 0.0);
            let prev_cn = (l > 0).then(|| self.trace.cn(l - 1));
            for v in 0..n {
                let ve = graph.var_edges(v);
                let total: f64 = ve.iter().map(|&e| self.g_a[e]).sum();
                g[wc_r.start + v] += total * lambda[v];
                if let Some(prev) = prev_cn {
                    for &e in ve {
                        // Incoming message e feeds every outgoing edge of v except e itself.
                        let excl: f64 = ve.iter().filter(|&&e2| e2 != e).map(|&e2| self.g_a[e2]).sum();
                        g[we_r.start + e] += prev[e] * excl;
                        self.g_cn_prev[e] = we[e] * excl;
                    }
                }
            }
            std::mem::swap(&mut self.g_cn, &mut self.g_cn_prev);
        }
        Ok(loss)
    }
}

/// Loss and exact gradient for one sample with codeword `codeword`.
pub fn backward(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambda: &[f64],
    codeword: &[u8],
    clip: f64,
) -> Result<(f64, GradientSet)> {
    let mut bp = Backprop::new(graph, weights.layers());
    let mut grads = GradientSet::zeros(weights.shape());
    let loss = bp.accumulate(graph, weights, lambda, codeword, clip, &mut grads)?;
    Ok((loss, grads))
}

/// Central differences `(loss(w + h) - loss(w - h)) / 2h`, one weight at a time.
pub fn finite_diff_grad(
    graph: &TannerGraph,
    weights: &WeightSet,
    lambda: &[f64],
    codeword: &[u8],
    clip: f64,
    step: f64,
) -> Result<GradientSet> {
    let mut w = weights.clone();
    let mut trace = DecodeTrace::new(graph, weights.layers());
    let mut out = Vec::with_capacity(w.values().len());
    for i in 0..w.values().len() {
        let orig = w.values()[i];
        w.values_mut()[i] = orig + step;
        wbp_forward_into(graph, &w, lambda, clip, &mut trace)?;
        let plus = bce_multiloss(&trace, codeword);
        w.values_mut()[i] = orig - step;
        wbp_forward_into(graph, &w, lambda, clip, &mut trace)?;
        let minus = bce_multiloss(&trace, codeword);
        w.values_mut()[i] = orig;
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(GradientSet::from_raw(weights.shape(), out))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::codes::fixtures;
    use crate::rng::{stream, Purpose};

    fn random_instance(
        pcm: crate::codes::ParityCheckMatrix,
        layers: usize,
        seed: u64,
    ) -> (TannerGraph, WeightSet, Vec<f64>) {
        let g = TannerGraph::new(&pcm);
        let mut rng = stream(seed, Purpose::Training, 99);
        let mut w = WeightSet::unit(&g, layers);
        w.values_mut().iter_mut().for_each(|x| *x = rng.random_range(0.5..1.5));
        let lambda = (0..g.n_vars()).map(|_| rng.random_range(-2.0..2.0)).collect();
        (g, w, lambda)
    }

    fn assert_close(a: &GradientSet, b: &GradientSet, rel: f64, abs: f64) {
        for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
            let diff = (x - y).abs();
            assert!(diff <= abs || diff <= rel * x.abs().max(y.abs()), "param {i}: {x} vs {y}");
        }
    }

    #[test]
    fn half_outputs_give_l_ln2() {
        let g = TannerGraph::new(&fixtures::hamming_7_4());
        let w = WeightSet::unit(&g, 5);
        let mut bp = Backprop::new(&g, 5);
        let mut grads = GradientSet::zeros(w.shape());
        let loss = bp.accumulate(&g, &w, &[0.0; 7], &[0, 1, 0, 1, 1, 0, 0], 10.0, &mut grads).unwrap();
        assert!((loss - 5.0 * std::f64::consts::LN_2).abs() < 1e-14);
        // With zero LLRs every message is zero, so channel and edge weights of
        // the variable layers get no gradient.
        for l in 0..5 {
            assert!(grads.vn_channel(l).iter().all(|&x| x == 0.0));
            assert!(grads.vn_edge(l).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn confident_correct_outputs_have_small_loss() {
        let g = TannerGraph::new(&fixtures::repetition_3());
        let w = WeightSet::unit(&g, 2);
        let (loss, _) = backward(&g, &w, &[40.0; 3], &[0; 3], 10.0).unwrap();
        assert!((0.0..1e-10).contains(&loss));
    }

    #[test]
    fn matches_finite_differences_on_repetition_code() {
        for seed in 0..10 {
            let (g, w, lambda) = random_instance(fixtures::repetition_3(), 2, seed);
            let (_, exact) = backward(&g, &w, &lambda, &[0; 3], 10.0).unwrap();
            let fd = finite_diff_grad(&g, &w, &lambda, &[0; 3], 10.0, 1e-5).unwrap();
            assert_close(&exact, &fd, 1e-5, 1e-8);
        }
    }

    #[test]
    fn matches_finite_differences_with_nonzero_codeword() {
        let (g, w, lambda) = random_instance(fixtures::hamming_7_4(), 3, 42);
        let c = [1, 1, 1, 0, 0, 0, 0];
        let (_, exact) = backward(&g, &w, &lambda, &c, 10.0).unwrap();
        let fd = finite_diff_grad(&g, &w, &lambda, &c, 10.0, 1e-5).unwrap();
        assert_close(&exact, &fd, 1e-5, 1e-8);
    }

    #[test]
    fn finite_differences_converge_quadratically() {
        let (g, w, lambda) = random_instance(fixtures::hamming_7_4(), 2, 7);
        let (_, exact) = backward(&g, &w, &lambda, &[0; 7], 10.0).unwrap();
        let err = |h: f64| {
            let fd = finite_diff_grad(&g, &w, &lambda, &[0; 7], 10.0, h).unwrap();
            fd.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e2 < e1 / 3.0, "{e1} -> {e2}");
    }

    #[test]
    fn central_difference_exact_for_quadratic() {
        // Oracle sanity check on f(w) = a w^2 + b w.
        let f = |w: f64| 3.0 * w * w - 2.0 * w;
        let (w, h) = (0.7, 1e-3);
        let fd = (f(w + h) - f(w - h)) / (2.0 * h);
        assert!((fd - (6.0 * w - 2.0)).abs() < 1e-10);
    }

    #[test]
    fn clipped_messages_block_gradient() {
        let g = TannerGraph::new(&fixtures::repetition_3());
        let w = WeightSet::unit(&g, 2);
        // Huge LLRs saturate every check message at the clip.
        let (_, grads) = backward(&g, &w, &[30.0, 30.0, 30.0], &[0; 3], 1.0).unwrap();
        let bp_trace = crate::decoder::wbp_forward(&g, &w, &[30.0; 3], 1.0).unwrap();
        assert!(bp_trace.cn_messages.iter().all(|&m| m == 1.0));
        assert!(grads.vn_channel(0).iter().all(|&x| x == 0.0));
        assert!(grads.vn_channel(1).iter().all(|&x| x == 0.0));
    }
}
