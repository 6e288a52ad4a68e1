//! Channel impulse responses and frame propagation.
//!
//! Two channel families are provided: the single-path identity channel used
//! for the AWGN experiments, and a Saleh-Valenzuela style multipath generator
//! whose defaults approximate a residential line-of-sight regime ("CM1-like").

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::report::fmt_f64;
use crate::rng::Seed;
use crate::waveform::Waveform;

/// Resolved multipath taps on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    gains: Vec<f64>,
    delays: Vec<usize>,
}

impl ChannelRealization {
    /// Builds a realization; delays must start at zero and strictly increase.
    pub fn new(gains: Vec<f64>, delays: Vec<usize>) -> Result<Self> {
        if gains.is_empty() || gains.len() != delays.len() {
            return param("channel needs matching, non-empty gain and delay lists");
        }
        if delays[0] != 0 {
            return param("first channel delay must be zero");
        }
        if delays.windows(2).any(|w| w[1] <= w[0]) {
            return param("channel delays must be strictly increasing");
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return param("channel gains must be finite");
        }
        Ok(Self { gains, delays })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// Number of resolved paths L.
    pub fn path_count(&self) -> usize {
        self.gains.len()
    }

    /// Sum of squared path gains.
    pub fn energy(&self) -> f64 {
        self.gains.iter().map(|g| g * g).sum()
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().expect("non-empty")
    }

    /// RMS delay spread in seconds for a grid at `sample_rate` Hz.
    pub fn rms_delay_spread(&self, sample_rate: f64) -> f64 {
        let e = self.energy();
        let t = |d: usize| d as f64 / sample_rate;
        let mean: f64 = self.gains.iter().zip(&self.delays).map(|(g, &d)| g * g * t(d)).sum::<f64>() / e;
        let second: f64 = self
            .gains
            .iter()
            .zip(&self.delays)
            .map(|(g, &d)| g * g * t(d) * t(d))
            .sum::<f64>()
            / e;
        (second - mean * mean).max(0.0).sqrt()
    }

    /// Writes `delay_ns,gain` rows.
    pub fn write_csv<W: Write>(&self, out: W, sample_rate: f64) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delay_ns", "gain"])?;
        for (g, &d) in self.gains.iter().zip(&self.delays) {
            w.write_record([fmt_f64(d as f64 / sample_rate * 1e9), fmt_f64(*g)])?;
        }
        w.flush()
    }
}

/// Identity channel: one tap of unit gain at zero delay.
pub fn awgn_channel() -> ChannelRealization {
    ChannelRealization {
        gains: vec![1.0],
        delays: vec![0],
    }
}

/// Saleh-Valenzuela generator parameters. Times are in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvChannelParams {
    /// Cluster arrival rate, 1/ns.
    pub cluster_arrival_rate: f64,
    /// Ray arrival rate within a cluster, 1/ns.
    pub ray_arrival_rate: f64,
    /// Cluster power decay constant, ns.
    pub cluster_decay: f64,
    /// Ray power decay constant, ns.
    pub ray_decay: f64,
    /// Paths beyond this excess delay are dropped, ns.
    pub max_excess_delay: f64,
    /// Sampling frequency of the delay grid, Hz.
    pub sample_rate: f64,
}

// Rough bound on generated rays; anything larger is a configuration mistake.
const MAX_EXPECTED_RAYS: f64 = 1e6;

impl SvChannelParams {
    /// Residential line-of-sight defaults on a 16 GHz grid.
    pub fn cm1_like() -> Self {
        Self {
            cluster_arrival_rate: 0.047,
            ray_arrival_rate: 1.54,
            cluster_decay: 22.61,
            ray_decay: 12.53,
            max_excess_delay: 50.0,
            sample_rate: 16e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.cluster_arrival_rate)
            && positive(self.ray_arrival_rate)
            && positive(self.cluster_decay)
            && positive(self.ray_decay)
            && positive(self.sample_rate))
        {
            return param("channel rates, decays and sample rate must be positive and finite");
        }
        if !(self.max_excess_delay.is_finite() && self.max_excess_delay >= 0.0) {
            return param("max excess delay must be non-negative");
        }
        let expected = (1.0 + self.cluster_arrival_rate * self.max_excess_delay)
            * (1.0 + self.ray_arrival_rate * self.max_excess_delay);
        if expected > MAX_EXPECTED_RAYS {
            return param(format!(
                "parameters imply ~{expected:.0} rays per realization"
            ));
        }
        Ok(())
    }

    /// Largest possible tap delay in samples.
    pub fn max_delay_samples(&self) -> usize {
        (self.max_excess_delay * 1e-9 * self.sample_rate).round() as usize
    }
}

/// Draws one multipath realization from `rng`.
///
/// Clusters arrive as a Poisson process at rate Λ starting at zero delay,
/// rays within each cluster at rate λ starting at the cluster arrival. A ray
/// at cluster delay `T` and intra-cluster delay `t` has mean power
/// `exp(-T/Γ) exp(-t/γ)` and an equiprobable sign. Delays are rounded to the
/// sample grid, colliding taps are summed and the result is scaled to unit
/// energy.
pub fn draw_sv_channel<R: Rng + ?Sized>(
    params: &SvChannelParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    params.validate()?;
    let cluster_gap = Exp::new(params.cluster_arrival_rate).map_err(|e| crate::Error::Parameter(e.to_string()))?;
    let ray_gap = Exp::new(params.ray_arrival_rate).map_err(|e| crate::Error::Parameter(e.to_string()))?;
    let to_samples = 1e-9 * params.sample_rate;
    loop {
        let mut taps: BTreeMap<usize, f64> = BTreeMap::new();
        let mut cluster = 0.0;
        while cluster <= params.max_excess_delay {
            let mut ray = 0.0;
            while cluster + ray <= params.max_excess_delay {
                let power = (-cluster / params.cluster_decay).exp() * (-ray / params.ray_decay).exp();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let d = ((cluster + ray) * to_samples).round() as usize;
                *taps.entry(d).or_insert(0.0) += sign * power.sqrt();
                ray += ray_gap.sample(rng);
            }
            cluster += cluster_gap.sample(rng);
        }
        // Exact cancellation of colliding taps leaves holes; drop them.
        let taps: Vec<(usize, f64)> = taps.into_iter().filter(|(_, g)| *g != 0.0).collect();
        if taps.is_empty() {
            continue;
        }
        let base = taps[0].0;
        let norm = taps.iter().map(|(_, g)| g * g).sum::<f64>().sqrt();
        let delays = taps.iter().map(|(d, _)| d - base).collect();
        let gains = taps.iter().map(|(_, g)| g / norm).collect();
        return ChannelRealization::new(gains, delays);
    }
}

pub fn sv_channel(params: &SvChannelParams, seed: Seed) -> Result<ChannelRealization> {
    draw_sv_channel(params, &mut seed.derive("channel", &[]).rng())
}

/// `y[n] = sum_l gains[l] * x[n - delays[l]]`, truncated to the input length.
pub fn propagate(x: &Waveform, h: &ChannelRealization) -> Waveform {
    propagate_counted(x, h).0
}

/// Like [`propagate`], also returning the energy pushed past the frame end.
pub fn propagate_counted(x: &Waveform, h: &ChannelRealization) -> (Waveform, f64) {
    let n = x.len();
    let mut y = vec![0.0; n];
    let mut spilled = vec![0.0; h.max_delay()];
    // Only the non-zero span of x contributes; frames are mostly zeros.
    let first = x.iter().position(|&v| v != 0.0);
    if let Some(first) = first {
        let last = x.iter().rposition(|&v| v != 0.0).expect("has a non-zero");
        for (&g, &d) in h.gains.iter().zip(&h.delays) {
            for k in first..=last {
                let t = k + d;
                if t < n {
                    y[t] += g * x[k];
                } else {
                    spilled[t - n] += g * x[k];
                }
            }
        }
    }
    let lost = spilled.iter().map(|v| v * v).sum();
    (Waveform::from_parts(y, x.sample_rate()), lost)
}
