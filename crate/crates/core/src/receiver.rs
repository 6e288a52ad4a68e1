//! Receiver front-ends and the coherent correlator.
//!
//! Three front-ends share the same template correlator: passthrough
//! (conventional receiver), blanking, and the cluster-detection algorithm
//! (CDA). CDA repeatedly takes the largest-magnitude sample; if it differs
//! from its right neighbor by at least `mu` it is an isolated impulse and is
//! zeroed, otherwise it is the center of a pulse-shaped signal cluster and
//! the search stops.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{param, Result};
use crate::waveform::{argmax_abs, modulate_frame, pulse_peak_stats, Bit, FrameConfig, Waveform};

/// Recommended range of the pulse-relative `mu` multiplier.
pub const KAPPA_RANGE: (f64, f64) = (2.0, 3.0);

/// `mu = kappa * |w[I] - w[I-1]|` at the pulse peak.
pub fn select_mu(w: &[f64], kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return param(format!("kappa must be positive, got {kappa}"));
    }
    if !(KAPPA_RANGE.0..=KAPPA_RANGE.1).contains(&kappa) {
        log::warn!("kappa {kappa} outside the recommended range [2, 3]");
    }
    Ok(kappa * pulse_peak_stats(w)?.adjacent_diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdaParams {
    /// Amplitude-difference threshold.
    pub mu: f64,
    /// Multiplier used to derive `mu` from the pulse, when applicable.
    pub kappa: Option<f64>,
    /// Cap on zeroed samples; `None` means the frame length.
    pub max_iterations: Option<usize>,
}

impl CdaParams {
    pub fn with_mu(mu: f64) -> Self {
        Self {
            mu,
            kappa: None,
            max_iterations: None,
        }
    }

    pub fn from_pulse(w: &[f64], kappa: f64) -> Result<Self> {
        Ok(Self {
            mu: select_mu(w, kappa)?,
            kappa: Some(kappa),
            max_iterations: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return param(format!("mu must be positive, got {}", self.mu));
        }
        Ok(())
    }

    /// Checks `mu >= |w[I] - w[I-1]|` for the transmitted pulse.
    pub fn validate_for_pulse(&self, w: &[f64]) -> Result<()> {
        self.validate()?;
        let bound = pulse_peak_stats(w)?.adjacent_diff;
        if self.mu < bound {
            return param(format!(
                "mu {} is below the pulse step bound {bound}",
                self.mu
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CdaDiagnostics {
    /// Number of zeroed samples.
    pub iterations: usize,
    /// `||r_i||_2` before the first and after every zeroing.
    pub norm_trace: Vec<f64>,
    /// Zeroed indices in order.
    pub zeroed: Vec<usize>,
    /// Set when `max_iterations` stopped the loop.
    pub hit_iteration_cap: bool,
    /// `||s_hat - s||_2`, filled by [`cda_with_reference`].
    pub residual_distance: Option<f64>,
}

impl CdaDiagnostics {
    /// Per-iteration contraction ratios `||r_{i+1}|| / ||r_i||`.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.norm_trace.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

// Right-neighbor step, falling back to the left neighbor at the last sample.
fn step(r: &[f64], i: usize) -> f64 {
    let j = if i + 1 < r.len() { i + 1 } else { i.saturating_sub(1) };
    (r[i] - r[j]).abs()
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Literal cluster-detection loop with a full rescan per iteration.
pub fn cda(r: &Waveform, params: &CdaParams) -> Result<(Waveform, CdaDiagnostics)> {
    params.validate()?;
    let mut x = r.samples().to_vec();
    let cap = params.max_iterations.unwrap_or(x.len());
    let mut diag = CdaDiagnostics {
        norm_trace: vec![norm(&x)],
        ..Default::default()
    };
    loop {
        let i = argmax_abs(&x).expect("non-empty");
        if x[i] == 0.0 || step(&x, i) < params.mu {
            break;
        }
        if diag.iterations == cap {
            diag.hit_iteration_cap = true;
            break;
        }
        x[i] = 0.0;
        diag.iterations += 1;
        diag.zeroed.push(i);
        diag.norm_trace.push(norm(&x));
    }
    Ok((Waveform::from_parts(x, r.sample_rate()), diag))
}

#[derive(PartialEq)]
struct Candidate {
    mag: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Larger magnitude first, then lower index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.mag
            .total_cmp(&other.mag)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Zeroes samples of `x` in place with the cluster-detection rule and
/// returns the zeroed indices, in order, plus whether the cap was hit.
///
/// Zeroing a sample never changes the magnitude of any other sample, so the
/// sequence of maxima is the descending-magnitude order of the input. A
/// binary heap yields that order lazily, giving the same result as the
/// rescanning loop in [`cda`] without an O(N) pass per iteration.
pub fn cda_in_place(x: &mut [f64], mu: f64, cap: usize) -> (Vec<usize>, bool) {
    let mut heap: BinaryHeap<Candidate> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(index, v)| Candidate { mag: v.abs(), index })
        .collect();
    let mut zeroed = Vec::new();
    while let Some(Candidate { index, .. }) = heap.pop() {
        if step(x, index) < mu {
            return (zeroed, false);
        }
        if zeroed.len() == cap {
            return (zeroed, true);
        }
        x[index] = 0.0;
        zeroed.push(index);
    }
    (zeroed, false)
}

/// Heap-accelerated CDA; identical output to [`cda`].
pub fn cda_fast(r: &Waveform, params: &CdaParams) -> Result<(Waveform, CdaDiagnostics)> {
    params.validate()?;
    let mut x = r.samples().to_vec();
    let cap = params.max_iterations.unwrap_or(x.len());
    let original = x.clone();
    let (zeroed, hit_iteration_cap) = cda_in_place(&mut x, params.mu, cap);
    // Accumulated backwards from the output so every partial sum is exact up
    // to rounding of positive terms.
    let mut e2: f64 = x.iter().map(|v| v * v).sum();
    let mut norm_trace = vec![0.0; zeroed.len() + 1];
    norm_trace[zeroed.len()] = e2.sqrt();
    for (j, &i) in zeroed.iter().enumerate().rev() {
        e2 += original[i] * original[i];
        norm_trace[j] = e2.sqrt();
    }
    Ok((
        Waveform::from_parts(x, r.sample_rate()),
        CdaDiagnostics {
            iterations: zeroed.len(),
            norm_trace,
            zeroed,
            hit_iteration_cap,
            residual_distance: None,
        },
    ))
}

/// CDA with the distance to the clean signal recorded.
pub fn cda_with_reference(
    r: &Waveform,
    s: &Waveform,
    params: &CdaParams,
) -> Result<(Waveform, CdaDiagnostics)> {
    r.check_compatible(s)?;
    let (out, mut diag) = cda(r, params)?;
    let d2: f64 = out.iter().zip(s.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    diag.residual_distance = Some(d2.sqrt());
    Ok((out, diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlankingParams {
    pub threshold: f64,
}

impl BlankingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return param(format!("blanking threshold must be positive, got {}", self.threshold));
        }
        Ok(())
    }
}

/// Zeroes every sample with `|r[k]| >= T`, returning the count.
pub fn blank_in_place(x: &mut [f64], threshold: f64) -> usize {
    let mut n = 0;
    for v in x.iter_mut() {
        if v.abs() >= threshold {
            *v = 0.0;
            n += 1;
        }
    }
    n
}

pub fn blank(r: &Waveform, params: &BlankingParams) -> Result<Waveform> {
    params.validate()?;
    let mut x = r.samples().to_vec();
    blank_in_place(&mut x, params.threshold);
    Ok(Waveform::from_parts(x, r.sample_rate()))
}

/// Perfect-CSI template `h * w` at the given chip position.
pub fn make_template(
    w: &Waveform,
    h: &ChannelRealization,
    chip_index: usize,
    cfg: &FrameConfig,
) -> Result<Waveform> {
    let frame = modulate_frame(Bit::Plus, chip_index, cfg, w)?;
    Ok(crate::channel::propagate(&frame, h))
}

/// Inner product `sum_k x[k] phi[k]`.
pub fn correlate(x: &[f64], phi: &[f64]) -> Result<f64> {
    if x.len() != phi.len() {
        return param(format!("length mismatch: {} vs {}", x.len(), phi.len()));
    }
    Ok(x.iter().zip(phi).map(|(a, b)| a * b).sum())
}

/// Sign decision; zero resolves to `Bit::Plus`.
pub fn detect(zeta: f64) -> Bit {
    if zeta >= 0.0 {
        Bit::Plus
    } else {
        Bit::Minus
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::awgn_channel;
    use crate::waveform::{generate_pulse, PulseParams};

    fn wf(v: Vec<f64>) -> Waveform {
        Waveform::new(v, 16e9).unwrap()
    }

    #[test]
    fn mu_selection() {
        assert_eq!(select_mu(&[0.0, 1.0, 0.5], 2.0).unwrap(), 2.0);
        assert!(select_mu(&[1.0], 2.0).is_err());
        let w = [0.1, 0.7, -0.2];
        let a = select_mu(&w, 2.5).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * 3.0).collect();
        assert!((select_mu(&scaled, 2.5).unwrap() - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn preset_mu_corresponds_to_low_kappa() {
        let w = generate_pulse(&PulseParams::new(0.4e-9, 16e9).unwrap()).unwrap();
        let step = pulse_peak_stats(&w).unwrap().adjacent_diff;
        let kappa = 0.3 / step;
        assert!((select_mu(&w, kappa).unwrap() - 0.3).abs() < 1e-12);
        assert!(CdaParams::with_mu(0.3).validate_for_pulse(&w).is_ok());
        assert!(CdaParams::with_mu(0.2).validate_for_pulse(&w).is_err());
    }

    #[test]
    fn cda_leaves_clean_pulse_alone() {
        let w = generate_pulse(&PulseParams::new(0.4e-9, 16e9).unwrap()).unwrap();
        let mut v = vec![0.0; 64];
        v[10..10 + w.len()].copy_from_slice(&w);
        let r = wf(v);
        let (out, d) = cda(&r, &CdaParams::with_mu(0.3)).unwrap();
        assert_eq!(out, r);
        assert_eq!(d.iterations, 0);
        assert_eq!(d.norm_trace.len(), 1);
    }

    #[test]
    fn cda_single_spike() {
        let mut v = vec![0.0; 32];
        v[7] = 100.0;
        let (out, d) = cda(&wf(v), &CdaParams::with_mu(0.3)).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
        assert_eq!(d.zeroed, vec![7]);
        assert_eq!(d.norm_trace, vec![100.0, 0.0]);
    }

    #[test]
    fn cda_spike_at_last_sample_uses_left_neighbor() {
        let mut v = vec![0.0; 8];
        v[7] = -50.0;
        let (_, d) = cda(&wf(v), &CdaParams::with_mu(0.3)).unwrap();
        assert_eq!(d.zeroed, vec![7]);
        let (_, d) = cda(&wf(vec![2.0]), &CdaParams::with_mu(0.3)).unwrap();
        assert_eq!(d.iterations, 0, "a lone sample has no neighbor to differ from");
    }

    #[test]
    fn cda_iteration_cap() {
        let v: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 10.0 + i as f64 } else { 0.0 }).collect();
        let p = CdaParams {
            max_iterations: Some(2),
            ..CdaParams::with_mu(1.0)
        };
        let (_, d) = cda(&wf(v.clone()), &p).unwrap();
        assert_eq!(d.iterations, 2);
        assert!(d.hit_iteration_cap);
        let (_, f) = cda_fast(&wf(v), &p).unwrap();
        assert_eq!(d, f);
    }

    #[test]
    fn cda_rejects_bad_mu() {
        assert!(cda(&wf(vec![1.0, 2.0]), &CdaParams::with_mu(0.0)).is_err());
        assert!(cda(&wf(vec![1.0, 2.0]), &CdaParams::with_mu(f64::NAN)).is_err());
    }

    #[test]
    fn cda_reference_distance() {
        let s = wf(vec![0.0, 0.5, 0.0, 0.0]);
        let r = wf(vec![0.0, 0.5, 0.0, 9.0]);
        let (_, d) = cda_with_reference(&r, &s, &CdaParams::with_mu(0.6)).unwrap();
        assert_eq!(d.residual_distance, Some(0.0));
    }

    #[test]
    fn blanking() {
        let r = wf(vec![5.0, 0.1, -5.0]);
        let p = BlankingParams { threshold: 4.0 };
        assert_eq!(blank(&r, &p).unwrap().samples(), &[0.0, 0.1, 0.0]);
        let quiet = wf(vec![1.0, -3.9, 0.0]);
        assert_eq!(blank(&quiet, &p).unwrap(), quiet);
        // Boundary is inclusive.
        assert_eq!(blank(&wf(vec![4.0, -4.0]), &p).unwrap().samples(), &[0.0, 0.0]);
        assert!(blank(&r, &BlankingParams { threshold: 0.0 }).is_err());
    }

    #[test]
    fn correlation_and_detection() {
        let phi = [0.6, 0.8, 0.0];
        assert!((correlate(&phi, &phi).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(correlate(&[0.8, -0.6, 0.0], &phi).unwrap(), 0.0);
        assert!(correlate(&[1.0], &phi).is_err());
        assert_eq!(detect(3.2), Bit::Plus);
        assert_eq!(detect(-0.001), Bit::Minus);
        assert_eq!(detect(0.0), Bit::Plus);
    }

    #[test]
    fn identity_template_is_modulated_frame() {
        let cfg = FrameConfig {
            frame_duration: 10e-9,
            chip_duration: 1e-9,
            th_cardinality: 3,
            sample_rate: 16e9,
            frames_per_symbol: 1,
        };
        let w = generate_pulse(&PulseParams::new(0.4e-9, 16e9).unwrap()).unwrap();
        let phi = make_template(&w, &awgn_channel(), 1, &cfg).unwrap();
        assert_eq!(phi, modulate_frame(Bit::Plus, 1, &cfg, &w).unwrap());
    }
}
