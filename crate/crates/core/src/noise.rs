//! Background Gaussian noise and Bernoulli-Gaussian impulse noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rng::Seed;
use crate::waveform::Waveform;

/// Signal power; every frame carries a unit-energy pulse.
pub const SIGNAL_POWER: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Background noise variance.
    pub sigma_n2: f64,
    /// Impulse amplitude variance.
    pub sigma_i2: f64,
    /// Per-sample impulse probability.
    pub p: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_n2.is_finite() && self.sigma_n2 >= 0.0) {
            return param(format!("sigma_n2 must be >= 0, got {}", self.sigma_n2));
        }
        if !(self.sigma_i2.is_finite() && self.sigma_i2 >= 0.0) {
            return param(format!("sigma_i2 must be >= 0, got {}", self.sigma_i2));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return param(format!("impulse probability must lie in [0, 1], got {}", self.p));
        }
        if self.p > 0.0 && self.sigma_i2 <= self.sigma_n2 {
            log::warn!(
                "impulse variance {} does not exceed background variance {}",
                self.sigma_i2,
                self.sigma_n2
            );
        }
        Ok(())
    }

    /// Effective noise power `sigma_n2 + p * sigma_i2`.
    pub fn effective_power(&self) -> f64 {
        self.sigma_n2 + self.p * self.sigma_i2
    }
}

/// SNR and SINR in dB relative to unit signal power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub snr_db: f64,
    pub sinr_db: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn noise_params_from_budget(b: LinkBudget, p: f64) -> Result<NoiseParams> {
    let params = NoiseParams {
        sigma_n2: SIGNAL_POWER / db_to_linear(b.snr_db),
        sigma_i2: SIGNAL_POWER / db_to_linear(b.sinr_db),
        p,
    };
    params.validate()?;
    Ok(params)
}

/// Fills `out` with Bernoulli-Gaussian impulses `b[k] * g[k]`.
pub fn fill_bg_impulse<R: Rng + ?Sized>(out: &mut [f64], sigma_i2: f64, p: f64, rng: &mut R) {
    let sd = sigma_i2.sqrt();
    for v in out.iter_mut() {
        *v = if p > 0.0 && rng.random::<f64>() < p {
            sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        } else {
            0.0
        };
    }
}

/// Fills `out` with i.i.d. `N(0, sigma2)` samples.
pub fn fill_gaussian<R: Rng + ?Sized>(out: &mut [f64], sigma2: f64, rng: &mut R) {
    let sd = sigma2.sqrt();
    for v in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *v = sd * g;
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return param("noise length must be at least 1");
    }
    Ok(())
}

/// Bernoulli-Gaussian impulse noise of length `n`.
pub fn bg_impulse(n: usize, params: &NoiseParams, sample_rate: f64, seed: Seed) -> Result<Waveform> {
    check_len(n)?;
    params.validate()?;
    let mut v = vec![0.0; n];
    fill_bg_impulse(&mut v, params.sigma_i2, params.p, &mut seed.derive("impulse", &[]).rng());
    Waveform::new(v, sample_rate)
}

/// White Gaussian background noise of length `n`.
pub fn awgn_noise(n: usize, sigma_n2: f64, sample_rate: f64, seed: Seed) -> Result<Waveform> {
    check_len(n)?;
    if !(sigma_n2.is_finite() && sigma_n2 >= 0.0) {
        return param(format!("sigma_n2 must be >= 0, got {sigma_n2}"));
    }
    let mut v = vec![0.0; n];
    fill_gaussian(&mut v, sigma_n2, &mut seed.derive("noise", &[]).rng());
    Waveform::new(v, sample_rate)
}
