//! Oracles written independently of the library: dense-matrix plain BP,
//! exhaustive ML over all 2^n words, and adaptive Simpson quadrature of the
//! Chi density.

#![allow(dead_code)]

use std::path::Path;

/// Dense parity-check matrix straight from alist text, without the library parser.
pub fn dense_from_alist(text: &str) -> Vec<Vec<u8>> {
    let nums: Vec<usize> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    let (n, m) = (nums[0], nums[1]);
    let (max_col, max_row) = (nums[2], nums[3]);
    let col_deg = &nums[4..4 + n];
    let mut pos = 4 + n + m;
    let mut h = vec![vec![0u8; n]; m];
    for (v, &d) in col_deg.iter().enumerate() {
        for &c in &nums[pos..pos + d] {
            h[c - 1][v] = 1;
        }
        pos += max_col;
    }
    let _ = max_row;
    h
}

/// Per-layer messages (indexed `[check][var]`) and soft outputs of flooding BP with messages
/// clipped to `[-clip, clip]` and check products clamped to `1 - 1e-12`.
pub struct PlainBp {
    pub vn: Vec<Vec<Vec<f64>>>,
    pub cn: Vec<Vec<Vec<f64>>>,
    pub x_hat: Vec<Vec<f64>>,
}

pub fn plain_bp(h: &[Vec<u8>], lambda: &[f64], layers: usize, clip: f64) -> PlainBp {
    let m = h.len();
    let n = h[0].len();
    let mut cn_prev = vec![vec![0.0; n]; m];
    let mut out = PlainBp { vn: Vec::new(), cn: Vec::new(), x_hat: Vec::new() };
    for _ in 0..layers {
        let mut vn = vec![vec![0.0; n]; m];
        for v in 0..n {
            for c in 0..m {
                if h[c][v] == 0 {
                    continue;
                }
                let mut a = lambda[v];
                for c2 in 0..m {
                    if c2 != c && h[c2][v] == 1 {
                        a += cn_prev[c2][v];
                    }
                }
                vn[c][v] = (a / 2.0).tanh();
            }
        }
        let mut cn = vec![vec![0.0; n]; m];
        for c in 0..m {
            for v in 0..n {
                if h[c][v] == 0 {
                    continue;
                }
                let mut p = 1.0;
                for v2 in 0..n {
                    if v2 != v && h[c][v2] == 1 {
                        p *= vn[c][v2];
                    }
                }
                let p: f64 = p.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
                cn[c][v] = (2.0 * p.atanh()).clamp(-clip, clip);
            }
        }
        let x: Vec<f64> = (0..n)
            .map(|v| {
                let mut s = lambda[v];
                for c in 0..m {
                    if h[c][v] == 1 {
                        s += cn[c][v];
                    }
                }
                1.0 / (1.0 + s.exp())
            })
            .collect();
        out.vn.push(vn);
        out.cn.push(cn.clone());
        out.x_hat.push(x);
        cn_prev = cn;
    }
    out
}

/// All words with zero syndrome, by exhaustive search over `2^n`.
pub fn codewords_exhaustive(h: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let n = h[0].len();
    (0u32..1 << n)
        .map(|x| (0..n).map(|i| ((x >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|w| h.iter().all(|row| row.iter().zip(w).map(|(a, b)| a & b).sum::<u8>() % 2 == 0))
        .collect()
}

/// ln Gamma(n/2) by the exact recurrences from Gamma(1) and Gamma(1/2).
pub fn ln_gamma_half(n: usize) -> f64 {
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    let mut acc = if n.is_multiple_of(2) { 0.0 } else { std::f64::consts::PI.sqrt().ln() };
    while x < n as f64 / 2.0 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

pub fn chi_pdf(r: f64, n: usize, sigma: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let log = (nf - 1.0) * r.ln()
        - (nf / 2.0 - 1.0) * 2f64.ln()
        - nf * sigma.ln()
        - ln_gamma_half(n)
        - r * r / (2.0 * sigma * sigma);
    log.exp()
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Files in a directory tree as sorted `(relative path, bytes)`, skipping `skip` names.
pub fn snapshot(dir: &Path, skip: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            if skip.contains(&name.as_str()) {
                continue;
            }
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
