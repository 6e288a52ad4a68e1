//! Second-derivative Gaussian monocycle and TH-BPSK frame construction.
//!
//! The pulse is `w(t) = A (1 - 4 pi (t/tau)^2) exp(-2 pi (t/tau)^2)`, sampled
//! on the simulation grid and scaled to unit energy so that the per-symbol
//! signal energy is exactly one.

use std::f64::consts::PI;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{param, Error, Result};
use crate::rng::Seed;

/// Out-of-support energy fraction tolerated when truncating the pulse.
pub const PULSE_TRUNCATION_ENERGY: f64 = 1e-6;

// Grid computations such as `10 ns * 16 GHz` land a few ulps off an integer.
const GRID_EPS: f64 = 1e-9;

/// Uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return param("waveform must contain at least one sample");
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return param(format!("sample rate must be positive, got {sample_rate}"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return param(format!("sample {i} is not finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// All-zero waveform of length `n`.
    pub fn zeros(n: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; n], sample_rate)
    }

    // Callers guarantee the invariants (non-empty, finite, positive rate).
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: f64) -> Self {
        debug_assert!(!samples.is_empty() && sample_rate > 0.0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|v| v * c).collect(), self.sample_rate)
    }

    /// Elementwise sum; both waveforms must share length and grid.
    pub fn add(&self, other: &Waveform) -> Result<Self> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(samples, self.sample_rate)
    }

    pub(crate) fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.len() != other.len() {
            return param(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            ));
        }
        if (self.sample_rate - other.sample_rate).abs() > GRID_EPS * self.sample_rate {
            return param(format!(
                "sample rate mismatch: {} vs {}",
                self.sample_rate, other.sample_rate
            ));
        }
        Ok(())
    }
}

impl Deref for Waveform {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.samples
    }
}

/// Parameters of the sampled monocycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    /// Pulse-width parameter in seconds.
    pub tau: f64,
    /// Sampling frequency in Hz.
    pub sample_rate: f64,
    /// Half-width of the sampled support in seconds.
    pub support_half_width: f64,
}

impl PulseParams {
    /// Pulse with the minimal support that keeps the out-of-support energy
    /// below [`PULSE_TRUNCATION_ENERGY`].
    pub fn new(tau: f64, sample_rate: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return param(format!("tau must be positive, got {tau}"));
        }
        let params = Self {
            tau,
            sample_rate,
            support_half_width: tau * truncation_half_width(PULSE_TRUNCATION_ENERGY),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return param(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return param(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            ));
        }
        if !(self.support_half_width.is_finite() && self.support_half_width >= self.tau) {
            return param(format!(
                "support half-width {} must be at least tau {}",
                self.support_half_width, self.tau
            ));
        }
        let tail = tail_energy_fraction(self.support_half_width / self.tau);
        // Slack covers the root-finding tolerance of `truncation_half_width`.
        if tail > PULSE_TRUNCATION_ENERGY * (1.0 + 1e-6) {
            return param(format!(
                "support half-width {} leaves {tail:.3e} of the pulse energy outside",
                self.support_half_width
            ));
        }
        Ok(())
    }

    /// Samples on each side of the pulse center.
    pub fn half_width_samples(&self) -> usize {
        (self.support_half_width * self.sample_rate - GRID_EPS).ceil() as usize
    }

    /// Number of samples in the generated pulse.
    pub fn support_samples(&self) -> usize {
        2 * self.half_width_samples() + 1
    }

    /// Full support duration in seconds.
    pub fn support_duration(&self) -> f64 {
        2.0 * self.support_half_width
    }
}

/// Un-normalized monocycle at normalized time `u = t / tau`.
pub fn monocycle(u: f64) -> f64 {
    let a = 2.0 * PI * u * u;
    (1.0 - 2.0 * a) * (-a).exp()
}

/// Fraction of monocycle energy outside `|t| <= x tau`.
///
/// Closed form of the tail integral of `(1 - a u^2)^2 exp(-a u^2)` with
/// `a = 4 pi`, normalized by the full-line energy.
pub fn tail_energy_fraction(x: f64) -> f64 {
    let x = x.max(0.0);
    let a = 4.0 * PI;
    let j0 = |x: f64| 0.5 * (PI / a).sqrt() * erfc(a.sqrt() * x);
    let tail = (-a * x * x).exp() * (a * x.powi(3) / 2.0 - x / 4.0) + 0.75 * j0(x);
    (tail / (0.75 * j0(0.0))).clamp(0.0, 1.0)
}

/// Smallest normalized half-width `x` with `tail_energy_fraction(x) <= frac`.
pub fn truncation_half_width(frac: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while tail_energy_fraction(hi) > frac {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail_energy_fraction(mid) > frac {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Samples the unit-energy monocycle, centered at index `half_width_samples`.
pub fn generate_pulse(params: &PulseParams) -> Result<Waveform> {
    params.validate()?;
    let half = params.half_width_samples() as i64;
    let mut samples: Vec<f64> = (-half..=half)
        .map(|k| monocycle(k as f64 / (params.sample_rate * params.tau)))
        .collect();
    let norm = samples.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return param("pulse sampled to zero energy; sample rate too low for tau");
    }
    samples.iter_mut().for_each(|v| *v /= norm);
    Waveform::new(samples, params.sample_rate)
}

/// Peak magnitude, its index and the magnitude of the step into the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakStats {
    pub peak: f64,
    pub index: usize,
    /// `|w[index] - w[index - 1]|`, or the right neighbor when the peak is
    /// the first sample.
    pub adjacent_diff: f64,
}

/// Index of the largest magnitude sample; the lowest index wins ties.
pub fn argmax_abs(x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in x.iter().enumerate() {
        let a = v.abs();
        match best {
            Some((_, b)) if a <= b => {}
            _ => best = Some((i, a)),
        }
    }
    best.map(|(i, _)| i)
}

pub fn pulse_peak_stats(w: &[f64]) -> Result<PeakStats> {
    if w.len() < 2 {
        return param("peak statistics need at least two samples");
    }
    let index = argmax_abs(w).expect("non-empty");
    let neighbor = if index == 0 { 1 } else { index - 1 };
    Ok(PeakStats {
        peak: w[index].abs(),
        index,
        adjacent_diff: (w[index] - w[neighbor]).abs(),
    })
}

/// Frame layout of the TH-BPSK link (one pulse per symbol).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    /// Frame duration in seconds.
    pub frame_duration: f64,
    /// Time-hopping chip duration in seconds.
    pub chip_duration: f64,
    /// Number of distinct chip positions.
    pub th_cardinality: usize,
    /// Sampling frequency in Hz.
    pub sample_rate: f64,
    #[serde(default = "one")]
    pub frames_per_symbol: usize,
}

fn one() -> usize {
    1
}

impl FrameConfig {
    /// Samples per frame, `ceil(T_f * F_s)`.
    pub fn samples_per_frame(&self) -> usize {
        (self.frame_duration * self.sample_rate - GRID_EPS).ceil() as usize
    }

    /// First sample of the pulse for a given chip.
    pub fn chip_offset(&self, chip_index: usize) -> usize {
        (chip_index as f64 * self.chip_duration * self.sample_rate + GRID_EPS).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.frame_duration) || !positive(self.sample_rate) {
            return param("frame duration and sample rate must be positive");
        }
        if !(self.chip_duration.is_finite() && self.chip_duration >= 0.0) {
            return param("chip duration must be non-negative");
        }
        if self.th_cardinality == 0 {
            return param("time-hopping cardinality must be at least 1");
        }
        if self.frames_per_symbol != 1 {
            return param("only one frame per symbol is supported");
        }
        Ok(())
    }

    /// Checks that every chip position plus the pulse support fits the frame.
    pub fn validate_with_pulse(&self, pulse: &PulseParams) -> Result<()> {
        self.validate()?;
        let needed = self.th_cardinality as f64 * self.chip_duration + pulse.support_duration();
        if needed > self.frame_duration * (1.0 + GRID_EPS) {
            return Err(Error::Configuration(format!(
                "{} chips of {:.3e} s plus a {:.3e} s pulse exceed the {:.3e} s frame",
                self.th_cardinality,
                self.chip_duration,
                pulse.support_duration(),
                self.frame_duration
            )));
        }
        Ok(())
    }
}

/// One chip index per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThCode {
    pub chip_indices: Vec<usize>,
    pub cardinality: usize,
}

impl ThCode {
    pub fn new(chip_indices: Vec<usize>, cardinality: usize) -> Result<Self> {
        if cardinality == 0 {
            return param("cardinality must be at least 1");
        }
        if let Some(c) = chip_indices.iter().find(|&&c| c >= cardinality) {
            return param(format!("chip index {c} outside [0, {cardinality})"));
        }
        Ok(Self {
            chip_indices,
            cardinality,
        })
    }
}

/// Uniform random time-hopping code drawn from `rng`.
pub fn draw_th_code<R: Rng + ?Sized>(
    n_frames: usize,
    cardinality: usize,
    rng: &mut R,
) -> Result<ThCode> {
    if n_frames == 0 {
        return param("time-hopping code needs at least one frame");
    }
    if cardinality == 0 {
        return param("cardinality must be at least 1");
    }
    let chips = (0..n_frames)
        .map(|_| rng.random_range(0..cardinality))
        .collect();
    Ok(ThCode {
        chip_indices: chips,
        cardinality,
    })
}

pub fn generate_th_code(n_frames: usize, cardinality: usize, seed: Seed) -> Result<ThCode> {
    draw_th_code(n_frames, cardinality, &mut seed.derive("th-code", &[]).rng())
}

/// Antipodal data symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Plus,
    Minus,
}

impl Bit {
    pub fn sign(self) -> f64 {
        match self {
            Bit::Plus => 1.0,
            Bit::Minus => -1.0,
        }
    }

    pub fn from_bool(one: bool) -> Self {
        if one {
            Bit::Plus
        } else {
            Bit::Minus
        }
    }
}

impl std::ops::Neg for Bit {
    type Output = Bit;

    fn neg(self) -> Bit {
        match self {
            Bit::Plus => Bit::Minus,
            Bit::Minus => Bit::Plus,
        }
    }
}

/// Single-path TH-BPSK frame: `bit * w` at the chip offset, zeros elsewhere.
pub fn modulate_frame(bit: Bit, chip_index: usize, cfg: &FrameConfig, w: &Waveform) -> Result<Waveform> {
    cfg.validate()?;
    if chip_index >= cfg.th_cardinality {
        return param(format!(
            "chip index {chip_index} outside [0, {})",
            cfg.th_cardinality
        ));
    }
    if (w.sample_rate() - cfg.sample_rate).abs() > GRID_EPS * cfg.sample_rate {
        return param("pulse and frame use different sample rates");
    }
    let omega = cfg.samples_per_frame();
    let start = cfg.chip_offset(chip_index);
    if start + w.len() > omega {
        return Err(Error::Configuration(format!(
            "pulse at sample {start} with {} samples spills past the {omega}-sample frame",
            w.len()
        )));
    }
    let mut samples = vec![0.0; omega];
    let s = bit.sign();
    for (dst, &v) in samples[start..start + w.len()].iter_mut().zip(w.iter()) {
        *dst = s * v;
    }
    Ok(Waveform::from_parts(samples, cfg.sample_rate))
}
