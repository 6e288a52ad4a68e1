//! Deterministic Monte Carlo engine.
//!
//! Each trial draws its bit, chip, channel and noise from streams derived
//! from `(master_seed, snr_index, trial_index)`, forms `r = s + i + n` once,
//! and hands the same `r` to every enabled front-end. Trials run in
//! fixed-size batches; a batch may execute on any number of workers, and the
//! results are reduced in trial order, so the output does not depend on the
//! worker count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, ThresholdPriors};
use crate::channel::{awgn_channel, draw_sv_channel, ChannelRealization, SvChannelParams};
use crate::error::{param, Error, Result};
use crate::noise::{fill_bg_impulse, fill_gaussian, noise_params_from_budget, LinkBudget, NoiseParams, SIGNAL_POWER};
use crate::receiver::{blank_in_place, cda_in_place, correlate, detect, make_template, select_mu};
use crate::rng::Seed;
use crate::waveform::{generate_pulse, Bit, FrameConfig, PulseParams, Waveform};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Multipath profile; times in ns, rates in 1/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvProfile {
    pub cluster_arrival_rate: f64,
    pub ray_arrival_rate: f64,
    pub cluster_decay: f64,
    pub ray_decay: f64,
    pub max_excess_delay: f64,
}

impl SvProfile {
    pub fn cm1_like() -> Self {
        let p = SvChannelParams::cm1_like();
        Self {
            cluster_arrival_rate: p.cluster_arrival_rate,
            ray_arrival_rate: p.ray_arrival_rate,
            cluster_decay: p.cluster_decay,
            ray_decay: p.ray_decay,
            max_excess_delay: p.max_excess_delay,
        }
    }

    pub fn at(&self, sample_rate: f64) -> SvChannelParams {
        SvChannelParams {
            cluster_arrival_rate: self.cluster_arrival_rate,
            ray_arrival_rate: self.ray_arrival_rate,
            cluster_decay: self.cluster_decay,
            ray_decay: self.ray_decay,
            max_excess_delay: self.max_excess_delay,
            sample_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    Awgn,
    Sv(SvProfile),
}

/// Receiver front-end selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReceiverSpec {
    Conventional,
    /// Fixed threshold, or the per-point optimum when `t_opt` is set.
    Blanking {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
        #[serde(default)]
        t_opt: bool,
    },
    /// Fixed `mu`, or `mu = kappa * |w[I] - w[I-1]|`.
    Cda {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
}

impl ReceiverSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ReceiverSpec::Conventional => Ok(()),
            ReceiverSpec::Blanking { threshold, t_opt } => match (threshold, t_opt) {
                (Some(t), false) if t.is_finite() && t > 0.0 => Ok(()),
                (None, true) => Ok(()),
                _ => param("blanking needs exactly one of a positive `threshold` or `t_opt = true`"),
            },
            ReceiverSpec::Cda { mu, kappa } => match (mu, kappa) {
                (Some(m), None) if m.is_finite() && m > 0.0 => Ok(()),
                (None, Some(k)) if k.is_finite() && k > 0.0 => Ok(()),
                _ => param("cda needs exactly one of a positive `mu` or `kappa`"),
            },
        }
    }

    /// Column label used in the output files.
    pub fn label(&self) -> String {
        match *self {
            ReceiverSpec::Conventional => "conventional".into(),
            ReceiverSpec::Blanking { threshold: Some(t), .. } => format!("blanking_T{t}"),
            ReceiverSpec::Blanking { .. } => "blanking_Topt".into(),
            ReceiverSpec::Cda { mu: Some(m), .. } => format!("cda_mu{m}"),
            ReceiverSpec::Cda { kappa: Some(k), .. } => format!("cda_kappa{k}"),
            ReceiverSpec::Cda { .. } => "cda".into(),
        }
    }
}

impl fmt::Display for ReceiverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ReceiverSpec::Conventional => write!(f, "conventional"),
            ReceiverSpec::Blanking { threshold: Some(t), .. } => write!(f, "blanking:{t}"),
            ReceiverSpec::Blanking { .. } => write!(f, "blanking:t_opt"),
            ReceiverSpec::Cda { mu: Some(m), .. } => write!(f, "cda:{m}"),
            ReceiverSpec::Cda { kappa: Some(k), .. } => write!(f, "cda:kappa={k}"),
            ReceiverSpec::Cda { .. } => write!(f, "cda"),
        }
    }
}

/// Parses `conventional`, `blanking:<T>`, `blanking:t_opt`, `cda:<mu>` or
/// `cda:kappa=<k>`.
impl FromStr for ReceiverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad number `{a}` in receiver `{s}`")))
        };
        let spec = match (kind, arg) {
            ("conventional", None) => ReceiverSpec::Conventional,
            ("blanking", Some("t_opt")) => ReceiverSpec::Blanking { threshold: None, t_opt: true },
            ("blanking", Some(a)) => ReceiverSpec::Blanking { threshold: Some(num(a)?), t_opt: false },
            ("cda", Some(a)) => match a.strip_prefix("kappa=") {
                Some(k) => ReceiverSpec::Cda { mu: None, kappa: Some(num(k)?) },
                None => ReceiverSpec::Cda { mu: Some(num(a)?), kappa: None },
            },
            _ => return param(format!("unknown receiver `{s}`")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// How the `theory_ber` column is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryMode {
    /// Lossless front-end: `rho = 0`, `sigma_e2 = sigma_n2` on every row.
    #[default]
    Nominal,
    /// CDA rows use the measured fraction of signal energy zeroed as `rho`.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub frame: FrameConfig,
    /// Pulse-width parameter, seconds.
    pub pulse_tau: f64,
    /// Pulse support half-width, seconds; defaults to the 1e-6 energy cut.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_support_half_width: Option<f64>,
    pub channel: ChannelModel,
    pub snr_db: Vec<f64>,
    pub sinr_db: f64,
    pub p: f64,
    pub receivers: Vec<ReceiverSpec>,
    /// Bit cap per SNR point.
    pub max_bits: u64,
    /// Stop a point once every receiver has this many errors.
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    pub master_seed: u64,
    /// Trials per reduction step; fixes where a point may stop.
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    #[serde(default)]
    pub theory: TheoryMode,
    #[serde(default)]
    pub threshold_priors: ThresholdPriors,
    /// Also simulate the impulse-free conventional receiver ("bpsk").
    #[serde(default = "yes")]
    pub include_baseline: bool,
}

fn default_min_errors() -> u64 {
    100
}

fn default_batch() -> u64 {
    4096
}

fn yes() -> bool {
    true
}

/// Label of the impulse-free baseline rows.
pub const BASELINE_LABEL: &str = "bpsk";

impl SimConfig {
    pub fn pulse_params(&self) -> Result<PulseParams> {
        let mut p = PulseParams::new(self.pulse_tau, self.frame.sample_rate)?;
        if let Some(h) = self.pulse_support_half_width {
            p.support_half_width = h;
            p.validate()?;
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pulse = self.pulse_params()?;
        self.frame.validate_with_pulse(&pulse)?;
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return param("SNR grid must be non-empty and finite");
        }
        if !self.sinr_db.is_finite() {
            return param("SINR must be finite");
        }
        if self.receivers.is_empty() {
            return param("at least one receiver must be enabled");
        }
        for r in &self.receivers {
            r.validate()?;
        }
        if self.max_bits == 0 || self.batch_size == 0 {
            return param("max_bits and batch_size must be at least 1");
        }
        NoiseParams { sigma_n2: 0.0, sigma_i2: 0.0, p: self.p }.validate()?;
        if let ChannelModel::Sv(profile) = self.channel {
            let params = profile.at(self.frame.sample_rate);
            params.validate()?;
            let last_chip = self.frame.chip_offset(self.frame.th_cardinality - 1);
            let needed = last_chip + pulse.support_samples() + params.max_delay_samples();
            let omega = self.frame.samples_per_frame();
            if needed > omega {
                return Err(Error::Configuration(format!(
                    "multipath tail reaches sample {needed} of a {omega}-sample frame"
                )));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the configuration's debug rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }
}

/// Receiver with its numeric parameter resolved for one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrontEnd {
    Conventional,
    Blanking { threshold: f64 },
    Cda { mu: f64 },
}

/// Everything fixed across the trials of one SNR point.
#[derive(Debug, Clone)]
pub struct PointSetup {
    pub snr_index: usize,
    pub snr_db: f64,
    pub noise: NoiseParams,
    pub frontends: Vec<FrontEnd>,
    pub labels: Vec<String>,
    pub include_baseline: bool,
}

/// Link-level state shared by every point.
#[derive(Debug, Clone)]
pub struct Link {
    pub frame: FrameConfig,
    pub pulse: Waveform,
    pub channel: Option<SvChannelParams>,
    pub master_seed: Seed,
}

impl Link {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let pulse = generate_pulse(&cfg.pulse_params()?)?;
        Ok(Self {
            frame: cfg.frame,
            pulse,
            channel: match cfg.channel {
                ChannelModel::Awgn => None,
                ChannelModel::Sv(p) => Some(p.at(cfg.frame.sample_rate)),
            },
            master_seed: Seed(cfg.master_seed),
        })
    }

    pub fn omega(&self) -> usize {
        self.frame.samples_per_frame()
    }

    /// Resolves receivers and noise for SNR grid entry `snr_index`.
    pub fn point(&self, cfg: &SimConfig, snr_index: usize) -> Result<PointSetup> {
        let snr_db = cfg.snr_db[snr_index];
        let noise = noise_params_from_budget(LinkBudget { snr_db, sinr_db: cfg.sinr_db }, cfg.p)?;
        let frontends = cfg
            .receivers
            .iter()
            .map(|r| {
                Ok(match *r {
                    ReceiverSpec::Conventional => FrontEnd::Conventional,
                    ReceiverSpec::Blanking { threshold: Some(t), .. } => FrontEnd::Blanking { threshold: t },
                    ReceiverSpec::Blanking { .. } => FrontEnd::Blanking {
                        threshold: analysis::optimal_threshold(cfg.threshold_priors, SIGNAL_POWER, &noise)?.threshold,
                    },
                    ReceiverSpec::Cda { mu: Some(mu), .. } => FrontEnd::Cda { mu },
                    ReceiverSpec::Cda { kappa: Some(k), .. } => FrontEnd::Cda { mu: select_mu(&self.pulse, k)? },
                    ReceiverSpec::Cda { .. } => return param("cda receiver without mu or kappa"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointSetup {
            snr_index,
            snr_db,
            noise,
            frontends,
            labels: cfg.receivers.iter().map(|r| r.label()).collect(),
            include_baseline: cfg.include_baseline,
        })
    }

    /// Draws the transmitted and received signals of one trial.
    pub fn draw(&self, point: &PointSetup, trial_index: u64) -> Result<TrialSignals> {
        let idx = [point.snr_index as u64, trial_index];
        let seed = |label: &str| self.master_seed.derive(label, &idx).rng();
        let bit = Bit::from_bool(seed("bit").random::<bool>());
        let chip = seed("chip").random_range(0..self.frame.th_cardinality);
        let channel = match &self.channel {
            None => awgn_channel(),
            Some(p) => draw_sv_channel(p, &mut seed("channel"))?,
        };
        let template = make_template(&self.pulse, &channel, chip, &self.frame)?;
        let omega = template.len();
        let s: Vec<f64> = template.iter().map(|v| bit.sign() * v).collect();
        let mut noise = vec![0.0; omega];
        fill_gaussian(&mut noise, point.noise.sigma_n2, &mut seed("noise"));
        let mut impulse = vec![0.0; omega];
        fill_bg_impulse(&mut impulse, point.noise.sigma_i2, point.noise.p, &mut seed("impulse"));
        let r = (0..omega).map(|k| s[k] + impulse[k] + noise[k]).collect();
        Ok(TrialSignals {
            bit,
            chip,
            channel,
            template: template.into_samples(),
            s,
            impulse,
            noise,
            r,
        })
    }
}

/// Signals of one trial, kept for diagnostics and oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignals {
    pub bit: Bit,
    pub chip: usize,
    pub channel: ChannelRealization,
    pub template: Vec<f64>,
    pub s: Vec<f64>,
    pub impulse: Vec<f64>,
    pub noise: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndOutcome {
    pub rx_bit: Bit,
    pub zeta: f64,
    /// Samples zeroed by the front-end (CDA iterations for CDA).
    pub zeroed: usize,
    /// Zeroed samples that carried no impulse.
    pub false_alarms: usize,
    /// Impulse samples left untouched.
    pub misses: usize,
    /// `||s - output||^2 / N`.
    pub mse: f64,
    /// Fraction of signal energy removed by zeroing.
    pub signal_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub tx_bit: Bit,
    pub outcomes: Vec<FrontEndOutcome>,
    /// Conventional receiver on the impulse-free `s + n`.
    pub baseline: Option<FrontEndOutcome>,
}

fn outcome(out: &[f64], sig: &TrialSignals, zeroed_mask: Option<&[bool]>) -> Result<FrontEndOutcome> {
    let zeta = correlate(out, &sig.template)?;
    let (mut zeroed, mut fa, mut miss) = (0, 0, 0);
    let mut lost = 0.0;
    for k in 0..out.len() {
        let z = zeroed_mask.map(|m| m[k]).unwrap_or(false);
        let hit = sig.impulse[k] != 0.0;
        if z {
            zeroed += 1;
            lost += sig.s[k] * sig.s[k];
            if !hit {
                fa += 1;
            }
        } else if hit {
            miss += 1;
        }
    }
    let es: f64 = sig.s.iter().map(|v| v * v).sum();
    Ok(FrontEndOutcome {
        rx_bit: detect(zeta),
        zeta,
        zeroed,
        false_alarms: fa,
        misses: miss,
        mse: analysis::mse(&sig.s, out)?,
        signal_loss: if es > 0.0 { lost / es } else { 0.0 },
    })
}

/// Applies one front-end to `r`, returning its output and zeroed mask.
pub fn apply_frontend(fe: FrontEnd, r: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let mut x = r.to_vec();
    let mut mask = vec![false; r.len()];
    match fe {
        FrontEnd::Conventional => {}
        FrontEnd::Blanking { threshold } => {
            blank_in_place(&mut x, threshold);
            for (m, v) in mask.iter_mut().zip(r) {
                *m = v.abs() >= threshold;
            }
        }
        FrontEnd::Cda { mu } => {
            let cap = x.len();
            let (zeroed, _) = cda_in_place(&mut x, mu, cap);
            zeroed.into_iter().for_each(|i| mask[i] = true);
        }
    }
    (x, mask)
}

/// Runs every front-end of `point` on trial `trial_index`.
pub fn run_trial(link: &Link, point: &PointSetup, trial_index: u64) -> Result<TrialResult> {
    let sig = link.draw(point, trial_index)?;
    let outcomes = point
        .frontends
        .iter()
        .map(|&fe| {
            let (out, mask) = apply_frontend(fe, &sig.r);
            outcome(&out, &sig, Some(&mask))
        })
        .collect::<Result<Vec<_>>>()?;
    let baseline = if point.include_baseline {
        let clean: Vec<f64> = sig.s.iter().zip(&sig.noise).map(|(a, b)| a + b).collect();
        let mut o = outcome(&clean, &sig, None)?;
        o.misses = 0;
        Some(o)
    } else {
        None
    };
    Ok(TrialResult {
        tx_bit: sig.bit,
        outcomes,
        baseline,
    })
}

/// Wilson score interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    if errors == 0 {
        return (0.0, z * z / (n as f64 + z * z));
    }
    let n_f = n as f64;
    let p = errors as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    bits: u64,
    errors: u64,
    zeroed: u64,
    false_alarms: u64,
    misses: u64,
    mse_sum: f64,
    loss_sum: f64,
}

impl Tally {
    fn add(&mut self, tx: Bit, o: &FrontEndOutcome) {
        self.bits += 1;
        self.errors += (o.rx_bit != tx) as u64;
        self.zeroed += o.zeroed as u64;
        self.false_alarms += o.false_alarms as u64;
        self.misses += o.misses as u64;
        self.mse_sum += o.mse;
        self.loss_sum += o.signal_loss;
    }
}

/// Aggregated statistics of one receiver at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverPoint {
    pub label: String,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Wilson 95% interval.
    pub ci: (f64, f64),
    pub theory_ber: f64,
    /// Stopped at the bit cap with fewer than `min_errors` errors.
    pub low_confidence: bool,
    /// BER estimate above 0.5.
    pub above_half: bool,
    pub mean_zeroed: f64,
    pub false_alarms: u64,
    pub misses: u64,
    pub mean_mse: f64,
    pub mean_signal_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub noise: NoiseParams,
    /// Nominal semi-analytic BER, equal to the impulse-free BPSK curve.
    pub theory_ber: f64,
    pub receivers: Vec<ReceiverPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
    pub config_hash: String,
    pub master_seed: u64,
}

impl BerCurve {
    pub fn receiver(&self, label: &str) -> Vec<&ReceiverPoint> {
        self.points
            .iter()
            .filter_map(|p| p.receivers.iter().find(|r| r.label == label))
            .collect()
    }

    pub fn has_low_confidence(&self) -> bool {
        self.points.iter().any(|p| p.receivers.iter().any(|r| r.low_confidence))
    }
}

/// Runs the trials of one SNR point until the stop rule fires.
pub fn run_point(cfg: &SimConfig, link: &Link, snr_index: usize) -> Result<BerPoint> {
    let point = link.point(cfg, snr_index)?;
    let n_fe = point.frontends.len();
    let mut tallies = vec![Tally::default(); n_fe];
    let mut base = Tally::default();
    let mut done = 0u64;
    while done < cfg.max_bits {
        let batch = cfg.batch_size.min(cfg.max_bits - done);
        let results: Vec<TrialResult> = (done..done + batch)
            .into_par_iter()
            .map(|t| run_trial(link, &point, t))
            .collect::<Result<_>>()?;
        for res in &results {
            for (t, o) in tallies.iter_mut().zip(&res.outcomes) {
                t.add(res.tx_bit, o);
            }
            if let Some(b) = &res.baseline {
                base.add(res.tx_bit, b);
            }
        }
        done += batch;
        if tallies.iter().all(|t| t.errors >= cfg.min_errors) {
            break;
        }
    }
    let nominal = analysis::awgn_theory_ber(point.noise.sigma_n2)?;
    let finish = |label: String, t: &Tally, theory: f64| {
        let ber = t.errors as f64 / t.bits as f64;
        ReceiverPoint {
            label,
            bits: t.bits,
            errors: t.errors,
            ber,
            ci: wilson_interval(t.errors, t.bits, Z_95),
            theory_ber: theory,
            low_confidence: t.errors < cfg.min_errors,
            above_half: ber > 0.5,
            mean_zeroed: t.zeroed as f64 / t.bits as f64,
            false_alarms: t.false_alarms,
            misses: t.misses,
            mean_mse: t.mse_sum / t.bits as f64,
            mean_signal_loss: t.loss_sum / t.bits as f64,
        }
    };
    let mut receivers: Vec<ReceiverPoint> = point
        .labels
        .iter()
        .zip(&point.frontends)
        .zip(&tallies)
        .map(|((label, fe), t)| {
            let theory = match (cfg.theory, fe) {
                (TheoryMode::Empirical, FrontEnd::Cda { .. }) => analysis::theory_ber(&analysis::BerTheoryInputs {
                    rho: (t.loss_sum / t.bits as f64).min(1.0 - f64::EPSILON),
                    pulse_energy: link.pulse.energy(),
                    path_gains: vec![1.0],
                    sigma_e2: point.noise.sigma_n2,
                })?,
                _ => nominal,
            };
            Ok(finish(label.clone(), t, theory))
        })
        .collect::<Result<_>>()?;
    if point.include_baseline {
        receivers.push(finish(BASELINE_LABEL.into(), &base, nominal));
    }
    Ok(BerPoint {
        snr_db: point.snr_db,
        noise: point.noise,
        theory_ber: nominal,
        receivers,
    })
}

/// BER versus SNR for every configured receiver.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<BerCurve> {
    let link = Link::new(cfg)?;
    let points = (0..cfg.snr_db.len())
        .map(|i| run_point(cfg, &link, i))
        .collect::<Result<_>>()?;
    Ok(BerCurve {
        points,
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
    })
}

/// Mean CDA MSE after a given number of iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseRow {
    pub mu: f64,
    pub iteration: usize,
    pub mse: f64,
}

/// Per-iteration mean MSE of CDA for each `mu`, over `trials` paired frames
/// at the first SNR of the grid.
///
/// A trial that has stopped keeps its final MSE for later iteration indices.
pub fn run_mse_convergence(cfg: &SimConfig, mu_list: &[f64], trials: u64) -> Result<Vec<MseRow>> {
    if trials == 0 || mu_list.is_empty() {
        return param("need at least one trial and one mu");
    }
    if let Some(m) = mu_list.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return param(format!("mu must be positive, got {m}"));
    }
    let link = Link::new(cfg)?;
    let point = link.point(cfg, 0)?;
    let traces: Vec<Vec<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sig = link.draw(&point, t)?;
            mu_list
                .iter()
                .map(|&mu| {
                    let mut x = sig.r.clone();
                    let cap = x.len();
                    let (zeroed, _) = cda_in_place(&mut x, mu, cap);
                    analysis::mse_trace(&sig.r, &sig.s, &zeroed)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut mus: Vec<(usize, f64)> = mu_list.iter().copied().enumerate().collect();
    mus.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut rows = Vec::new();
    for (m, mu) in mus {
        let longest = traces.iter().map(|t| t[m].len()).max().unwrap_or(1);
        for it in 0..longest {
            let sum: f64 = traces
                .iter()
                .map(|t| {
                    let tr = &t[m];
                    tr[it.min(tr.len() - 1)]
                })
                .sum();
            rows.push(MseRow {
                mu,
                iteration: it,
                mse: sum / trials as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub snr_db: f64,
    pub sinr_db: f64,
    pub t_opt: f64,
    pub objective: f64,
}

/// Blanking-threshold lookup table over an SNR x SINR grid.
pub fn run_threshold_study(
    snr_db: &[f64],
    sinr_db: &[f64],
    p: f64,
    priors: ThresholdPriors,
) -> Result<Vec<ThresholdRow>> {
    let mut rows = Vec::with_capacity(snr_db.len() * sinr_db.len());
    for &sinr in sinr_db {
        for &snr in snr_db {
            let noise = noise_params_from_budget(LinkBudget { snr_db: snr, sinr_db: sinr }, p)?;
            let opt = analysis::optimal_threshold(priors, SIGNAL_POWER, &noise)?;
            rows.push(ThresholdRow {
                snr_db: snr,
                sinr_db: sinr,
                t_opt: opt.threshold,
                objective: opt.objective,
            });
        }
    }
    Ok(rows)
}
