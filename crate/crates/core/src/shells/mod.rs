//! Radial segmentation of the noise space and distributions over shells.
//!
//! The norm of `n`-dimensional `N(0, sigma^2 I)` noise follows a scaled Chi
//! law. The radius range `[r_min, r_max]` is cut into `M` equal-width shells;
//! shell `l` (0-based) covers `[boundaries[l], boundaries[l + 1]]`.

mod special;

use std::io::Write;
use std::path::Path;

use rand_distr::StandardNormal;

use crate::error::{Error, Result};
pub use special::{ln_gamma, regularized_gamma};

const BISECTION_MAX_ITER: usize = 200;

/// Density of `||z||` for `z ~ N(0, sigma^2 I_n)`.
pub fn chi_pdf(r: f64, n: usize, sigma: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let log_norm = (nf / 2.0 - 1.0) * std::f64::consts::LN_2 + nf * sigma.ln() + ln_gamma(nf / 2.0);
    if r == 0.0 {
        return if n == 1 { (-log_norm).exp() } else { 0.0 };
    }
    ((nf - 1.0) * r.ln() - r * r / (2.0 * sigma * sigma) - log_norm).exp()
}

/// `(Pr(||z|| <= r), Pr(||z|| > r))`.
pub fn chi_cdf_pair(r: f64, n: usize, sigma: f64) -> (f64, f64) {
    if r <= 0.0 {
        return (0.0, 1.0);
    }
    regularized_gamma(n as f64 / 2.0, r * r / (2.0 * sigma * sigma))
}

pub fn chi_cdf(r: f64, n: usize, sigma: f64) -> f64 {
    chi_cdf_pair(r, n, sigma).0
}

/// Brackets `r` with `tail(r) = target` for a tail that decreases in `r`.
/// Returns `(lo, hi)` with `tail(lo) > target >= tail(hi)`.
fn bisect(target: f64, scale: f64, tail: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = scale.max(f64::MIN_POSITIVE);
    let mut grow = 0;
    while tail(hi) > target {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > BISECTION_MAX_ITER || !hi.is_finite() {
            return Err(Error::NoConvergence(BISECTION_MAX_ITER));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= 1e-15 * hi {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(BISECTION_MAX_ITER))
}

/// Uniform partition of a radius range into shells.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellPartition {
    n: usize,
    sigma: f64,
    boundaries: Vec<f64>,
}

impl ShellPartition {
    /// Chooses `[r_min, r_max]` so that each Chi tail outside it has mass at most
    /// `epsilon / 2`, then splits it into `shells` equal-width shells.
    pub fn build(n: usize, sigma: f64, shells: usize, epsilon: f64) -> Result<Self> {
        if shells < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 shells, got {shells}")));
        }
        if !(epsilon > 0.0 && epsilon < 0.1) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0, 0.1)")));
        }
        check_dims(n, sigma)?;
        let scale = sigma * (n as f64).sqrt();
        let r_min = lower_quantile(n, sigma, epsilon / 2.0, scale)?;
        let (_, r_max) = bisect(epsilon / 2.0, scale, |r| chi_cdf_pair(r, n, sigma).1)?;
        Self::uniform(n, sigma, r_min, r_max, shells)
    }

    /// Equal-width shells on an explicit range.
    pub fn uniform(n: usize, sigma: f64, r_min: f64, r_max: f64, shells: usize) -> Result<Self> {
        check_dims(n, sigma)?;
        if shells == 0 || !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad shell range [{r_min}, {r_max}] with {shells} shells"
            )));
        }
        let width = (r_max - r_min) / shells as f64;
        let mut boundaries: Vec<f64> = (0..shells).map(|l| r_min + l as f64 * width).collect();
        boundaries.push(r_max);
        Ok(Self { n, sigma, boundaries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r_min(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn width(&self) -> f64 {
        (self.r_max() - self.r_min()) / self.len() as f64
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// `(r_lo, r_hi)` of shell `l`.
    pub fn bounds(&self, l: usize) -> (f64, f64) {
        (self.boundaries[l], self.boundaries[l + 1])
    }

    /// Shell containing radius `r`, if inside the range.
    pub fn locate(&self, r: f64) -> Option<usize> {
        if r < self.r_min() || r > self.r_max() {
            return None;
        }
        let l = self.boundaries.partition_point(|&b| b <= r);
        Some(l.saturating_sub(1).min(self.len() - 1))
    }

    /// Chi probability of each shell before renormalization.
    pub fn raw_masses(&self) -> Vec<f64> {
        let pairs: Vec<(f64, f64)> =
            self.boundaries.iter().map(|&r| chi_cdf_pair(r, self.n, self.sigma)).collect();
        pairs
            .windows(2)
            .map(|w| {
                let ((p_lo, q_lo), (p_hi, q_hi)) = (w[0], w[1]);
                let m = if p_hi < 0.5 { p_hi - p_lo } else { q_lo - q_hi };
                m.max(0.0)
            })
            .collect()
    }

    /// Chi masses renormalized over the truncated range.
    pub fn shell_masses(&self) -> RadialPmf {
        let raw = self.raw_masses();
        let total: f64 = raw.iter().sum();
        RadialPmf { masses: raw.into_iter().map(|m| m / total).collect() }
    }

    /// Chi CDF conditioned on `[r_min, r_max]`.
    pub fn truncated_cdf(&self, r: f64) -> f64 {
        let lo = chi_cdf_pair(self.r_min(), self.n, self.sigma);
        let hi = chi_cdf_pair(self.r_max(), self.n, self.sigma);
        let x = chi_cdf_pair(r.clamp(self.r_min(), self.r_max()), self.n, self.sigma);
        let (num, den) = if x.0 < 0.5 { (x.0 - lo.0, hi.0 - lo.0) } else { (lo.1 - x.1, lo.1 - hi.1) };
        (num / den).clamp(0.0, 1.0)
    }
}

/// Largest bracketed `r` with `CDF(r) <= target`.
fn lower_quantile(n: usize, sigma: f64, target: f64, scale: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, scale);
    while chi_cdf(hi, n, sigma) <= target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence(BISECTION_MAX_ITER));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= 1e-15 * hi {
            return Ok(lo);
        }
        let mid = 0.5 * (lo + hi);
        if chi_cdf(mid, n, sigma) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(BISECTION_MAX_ITER))
}

fn check_dims(n: usize, sigma: f64) -> Result<()> {
    if n == 0 || !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and sigma > 0, got n = {n}, sigma = {sigma}"
        )));
    }
    Ok(())
}

/// Probability mass over the shells of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPmf {
    masses: Vec<f64>,
}

impl RadialPmf {
    /// Normalizes nonnegative weights into a pmf.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("pmf weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateTilt);
        }
        Ok(Self { masses: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Indices with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.masses.len()).filter(|&l| self.masses[l] > 0.0).collect()
    }
}

/// Importance-sampling tilt `P*_l = sqrt(theta_l) P_l / sum_j sqrt(theta_j) P_j`.
pub fn tilted_pmf(base: &RadialPmf, theta: &[f64]) -> Result<RadialPmf> {
    if theta.len() != base.len() {
        return Err(Error::Dimension {
            what: "theta profile length",
            expected: base.len(),
            got: theta.len(),
        });
    }
    let weights: Vec<f64> = theta.iter().zip(base.masses()).map(|(&t, &p)| t.max(0.0).sqrt() * p).collect();
    RadialPmf::from_weights(weights)
}

/// Completes a raw error-ratio profile.
///
/// With `l_min`/`l_max` the first/last shells where `raw > 0`: values are
/// interpolated linearly in radius between consecutive nonzero shells,
/// `raw[l_min]` is extended down `tail_extend` shells, `raw[l_max]` is extended
/// up to the last shell, and finally every value above `gamma` is zeroed.
pub fn fill_theta(raw: &[f64], partition: &ShellPartition, gamma: f64, tail_extend: usize) -> Vec<f64> {
    assert_eq!(raw.len(), partition.len(), "theta length must match the partition");
    let mut out = vec![0.0; raw.len()];
    let knots: Vec<usize> = (0..raw.len()).filter(|&l| raw[l] > 0.0).collect();
    let (Some(&first), Some(&last)) = (knots.first(), knots.last()) else {
        return out;
    };
    let radius = |l: usize| partition.boundaries()[l + 1];
    for v in &mut out[first.saturating_sub(tail_extend)..=first] {
        *v = raw[first];
    }
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let slope = (raw[b] - raw[a]) / (radius(b) - radius(a));
        for (l, v) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            *v = raw[a] + slope * (radius(l) - radius(a));
        }
        out[b] = raw[b];
    }
    for v in &mut out[last..] {
        *v = raw[last];
    }
    for v in &mut out {
        if *v > gamma {
            *v = 0.0;
        }
    }
    out
}

/// Error/trial tally for one shell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ShellCount {
    pub errors: u64,
    pub trials: u64,
}

/// Per-shell error ratios with the tallies they were estimated from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThetaProfile {
    pub theta: Vec<f64>,
    pub counts: Vec<ShellCount>,
    pub gamma: f64,
}

impl ThetaProfile {
    /// The initial profile `theta = 1` everywhere.
    pub fn ones(shells: usize, gamma: f64) -> Self {
        Self { theta: vec![1.0; shells], counts: vec![ShellCount::default(); shells], gamma }
    }

    /// Ratios `errors / trials`, zero where a shell saw no trials.
    pub fn from_counts(counts: Vec<ShellCount>, gamma: f64) -> Self {
        let theta = counts
            .iter()
            .map(|c| if c.trials == 0 { 0.0 } else { c.errors as f64 / c.trials as f64 })
            .collect();
        Self { theta, counts, gamma }
    }

    /// Interpolated and thresholded copy; counts are kept.
    pub fn filled(&self, partition: &ShellPartition, tail_extend: usize) -> Self {
        Self {
            theta: fill_theta(&self.theta, partition, self.gamma, tail_extend),
            counts: self.counts.clone(),
            gamma: self.gamma,
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.theta.iter().all(|&t| t == 0.0)
    }

    /// CSV with header `shell_index,r_lo,r_hi,theta,errors,trials`.
    pub fn to_csv(&self, partition: &ShellPartition) -> String {
        let mut out = String::from("shell_index,r_lo,r_hi,theta,errors,trials\n");
        for (l, (t, c)) in self.theta.iter().zip(&self.counts).enumerate() {
            let (lo, hi) = partition.bounds(l);
            out.push_str(&format!("{l},{lo:?},{hi:?},{t:?},{},{}\n", c.errors, c.trials));
        }
        out
    }

    pub fn write_csv(&self, partition: &ShellPartition, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv(partition).as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Parses the CSV written by [`ThetaProfile::to_csv`]. Radii are returned
    /// alongside so callers can check them against their own partition.
    pub fn parse_csv(text: &str, gamma: f64) -> std::result::Result<(Self, Vec<(f64, f64)>), String> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        let expected = ["shell_index", "r_lo", "r_hi", "theta", "errors", "trials"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()));
        }
        let mut theta = Vec::new();
        let mut counts = Vec::new();
        let mut radii = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |j: usize| rec.get(j).unwrap_or("");
            let bad = |j: usize| format!("row {}: bad `{}` value `{}`", i + 1, expected[j], field(j));
            let idx: usize = field(0).parse().map_err(|_| bad(0))?;
            if idx != i {
                return Err(format!("row {}: shell_index {idx} out of order", i + 1));
            }
            let lo: f64 = field(1).parse().map_err(|_| bad(1))?;
            let hi: f64 = field(2).parse().map_err(|_| bad(2))?;
            let t: f64 = field(3).parse().map_err(|_| bad(3))?;
            if !(0.0..=1.0).contains(&t) {
                return Err(bad(3));
            }
            let errors: u64 = field(4).parse().map_err(|_| bad(4))?;
            let trials: u64 = field(5).parse().map_err(|_| bad(5))?;
            theta.push(t);
            counts.push(ShellCount { errors, trials });
            radii.push((lo, hi));
        }
        Ok((Self { theta, counts, gamma }, radii))
    }
}

/// Draws noise vectors whose radius follows a [`RadialPmf`].
#[derive(Debug, Clone)]
pub struct ShellSampler {
    n: usize,
    boundaries: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ShellSampler {
    pub fn new(partition: &ShellPartition, pmf: &RadialPmf) -> Result<Self> {
        if pmf.len() != partition.len() {
            return Err(Error::Dimension { what: "pmf length", expected: partition.len(), got: pmf.len() });
        }
        let cumulative = pmf
            .masses()
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(Self { n: partition.n(), boundaries: partition.boundaries().to_vec(), cumulative })
    }

    pub fn sample_shell<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }

    /// A shell index drawn from the pmf, then a radius uniform within it and a
    /// uniformly random direction. Returns `(z, shell)`.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let l = self.sample_shell(rng);
        let (lo, hi) = (self.boundaries[l], self.boundaries[l + 1]);
        let r = lo + (hi - lo) * rng.random::<f64>();
        (random_direction(self.n, rng).into_iter().map(|d| r * d).collect(), l)
    }
}

/// Uniform unit vector in `R^n`.
pub fn random_direction<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// One draw; see [`ShellSampler::sample`].
pub fn sample_noise<R: rand::Rng + ?Sized>(
    partition: &ShellPartition,
    pmf: &RadialPmf,
    rng: &mut R,
) -> Result<(Vec<f64>, usize)> {
    Ok(ShellSampler::new(partition, pmf)?.sample(rng))
}
