//! BPSK over AWGN: SNR conventions, noise, and channel LLRs.
//!
//! Bit 0 maps to `+1` and bit 1 to `-1`, so the all-zero codeword is the
//! all-ones vector and a positive LLR favours bit 0.

use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Noise level for one SNR point. SNR is Eb/N0 in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, rate: f64) -> Result<Self> {
        Ok(Self { snr_db, rate, sigma: snr_to_sigma(snr_db, rate)? })
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("code rate {rate} not in (0, 1)")))
    }
}

/// `sigma = 1 / sqrt(2 R 10^(snr/10))`.
pub fn snr_to_sigma(snr_db: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    let sigma = (2.0 * rate * 10f64.powf(snr_db / 10.0)).sqrt().recip();
    if sigma.is_finite() && sigma > 0.0 {
        Ok(sigma)
    } else {
        Err(Error::InvalidArgument(format!("SNR {snr_db} dB gives sigma {sigma}")))
    }
}

pub fn sigma_to_snr(sigma: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma {sigma} must be positive")));
    }
    Ok(10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10())
}

/// `n` i.i.d. `N(0, sigma^2)` samples.
pub fn awgn_noise<R: rand::Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Channel LLRs `2 y / sigma^2`.
pub fn llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// LLRs of the all-zero codeword received with noise `z`: `2 (1 + z) / sigma^2`.
pub fn llr_all_zero(z: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    z.iter().map(|&v| scale * (1.0 + v)).collect()
}

pub fn bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Training SNR rule of thumb: `min(snr_test, 10 log10(2^(2R) - 1))`.
pub fn train_snr_guideline(snr_test_db: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    let cap = 10.0 * (2f64.powf(2.0 * rate) - 1.0).log10();
    Ok(snr_test_db.min(cap))
}
