//! Closed-form expressions: Gaussian tail, detection probabilities,
//! blanking-threshold optimization, semi-analytic BER and the
//! signal/impulse overlap statistics.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::channel::ChannelRealization;
use crate::error::{param, Error, Result};
use crate::noise::NoiseParams;
use crate::waveform::{FrameConfig, Waveform};

fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Karagiannidis-Lioumpas approximation of `Q(x)` for `x > 0`.
pub fn q_approx(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("Q approximation needs x > 0, got {x}"));
    }
    Ok(q_approx_unchecked(x))
}

fn q_approx_unchecked(x: f64) -> f64 {
    const A: f64 = 1.4;
    const B: f64 = 1.135;
    (1.0 - (-A * x).exp()) * (-x * x / 2.0).exp() / (B * (2.0 * std::f64::consts::PI).sqrt() * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionProbInputs {
    pub mu: f64,
    /// Lag-1 correlation of the clean signal.
    pub rho_s: f64,
    pub sigma_s2: f64,
    pub sigma_n2: f64,
    pub sigma_i2: f64,
    pub p: f64,
}

impl DetectionProbInputs {
    fn validate(&self) -> Result<()> {
        if !(self.rho_s.abs() <= 1.0) {
            return param(format!("rho_s must lie in [-1, 1], got {}", self.rho_s));
        }
        if [self.sigma_s2, self.sigma_n2, self.sigma_i2].iter().any(|v| !(*v >= 0.0)) {
            return param("variances must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return param("impulse probability must lie in [0, 1]");
        }
        if !(self.mu >= 0.0) {
            return param("mu must be non-negative");
        }
        Ok(())
    }

    /// Variance of the adjacent-sample difference on a signal sample.
    pub fn signal_diff_variance(&self) -> f64 {
        2.0 * ((1.0 - self.rho_s) * self.sigma_s2 + self.sigma_n2)
    }

    /// Variance of the adjacent-sample difference on an impulse sample.
    pub fn impulse_diff_variance(&self) -> f64 {
        2.0 * ((1.0 - self.rho_s) * self.sigma_s2 + self.sigma_n2 + self.p * self.sigma_i2)
    }
}

/// Probability that a signal sample is flagged as an impulse.
pub fn prob_false_alarm(inp: &DetectionProbInputs) -> Result<f64> {
    inp.validate()?;
    let var = inp.signal_diff_variance();
    if !(var > 0.0) {
        return domain("signal difference variance is zero");
    }
    Ok((2.0 * q(inp.mu / var.sqrt())).min(1.0))
}

/// Probability that an impulse sample is accepted as signal.
pub fn prob_miss(inp: &DetectionProbInputs) -> Result<f64> {
    inp.validate()?;
    let var = inp.impulse_diff_variance();
    if !(var > 0.0) {
        return domain("impulse difference variance is zero");
    }
    Ok((1.0 - 2.0 * q(inp.mu / var.sqrt())).max(0.0))
}

fn blanking_scales(sigma_s2: f64, noise: &NoiseParams) -> Result<(f64, f64)> {
    noise.validate()?;
    let a = sigma_s2 + noise.sigma_n2;
    let b = a + noise.p * noise.sigma_i2;
    if !(a > 0.0) {
        return domain("signal plus noise variance is zero");
    }
    Ok((a.sqrt(), b.sqrt()))
}

/// Blanking false-alarm and miss probabilities `(p_fT, p_mT)`.
pub fn blanking_pf_pm(threshold: f64, sigma_s2: f64, noise: &NoiseParams) -> Result<(f64, f64)> {
    if !(threshold > 0.0) {
        return domain(format!("blanking threshold must be positive, got {threshold}"));
    }
    let (a, b) = blanking_scales(sigma_s2, noise)?;
    Ok((
        (2.0 * q(threshold / a)).min(1.0),
        (1.0 - 2.0 * q(threshold / b)).max(0.0),
    ))
}

/// Prior weights of the signal and impulse hypotheses in the blanking
/// threshold objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPriors {
    pub signal: f64,
    pub impulse: f64,
}

impl Default for ThresholdPriors {
    /// 0.7 / 0.3.
    fn default() -> Self {
        Self {
            signal: 0.7,
            impulse: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptimum {
    pub threshold: f64,
    /// Objective at the optimum with the approximate Q used in the search.
    pub objective_approx: f64,
    /// Objective at the optimum evaluated with exact Q.
    pub objective: f64,
    /// More than one local minimum was found on the seeding grid.
    pub multimodal: bool,
}

/// Tolerance of the golden-section search on T.
pub const THRESHOLD_TOLERANCE: f64 = 1e-3;
const SEED_GRID: usize = 400;

/// Blanking objective `P(H_s) p_fT + P(H_i) p_mT` with a pluggable Q.
pub fn threshold_objective(
    threshold: f64,
    priors: ThresholdPriors,
    sigma_s2: f64,
    noise: &NoiseParams,
    exact: bool,
) -> Result<f64> {
    let (a, b) = blanking_scales(sigma_s2, noise)?;
    let qf = |x: f64| {
        if exact {
            q(x)
        } else {
            // Continuous extension of the approximation at 0.
            q_approx_unchecked(x.max(1e-12))
        }
    };
    let t = threshold.max(0.0);
    Ok(priors.signal * 2.0 * qf(t / a) + priors.impulse * (1.0 - 2.0 * qf(t / b)))
}

/// Search bracket `[0, 10 sqrt(sigma_s2 + sigma_n2 + p sigma_i2)]`.
pub fn threshold_bracket(sigma_s2: f64, noise: &NoiseParams) -> (f64, f64) {
    (0.0, 10.0 * (sigma_s2 + noise.effective_power()).sqrt())
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes the blanking objective over T with the approximate Q.
///
/// A coarse grid over the bracket seeds the search: when it shows a single
/// basin the golden-section search runs over the full bracket, otherwise the
/// best grid cell is refined and the result is flagged `multimodal`.
pub fn optimal_threshold(
    priors: ThresholdPriors,
    sigma_s2: f64,
    noise: &NoiseParams,
) -> Result<ThresholdOptimum> {
    if !(priors.signal >= 0.0 && priors.impulse >= 0.0) {
        return param("hypothesis priors must be non-negative");
    }
    let (lo, hi) = threshold_bracket(sigma_s2, noise);
    let f = |t: f64| threshold_objective(t, priors, sigma_s2, noise, false);
    let step = (hi - lo) / SEED_GRID as f64;
    let grid: Vec<f64> = (0..=SEED_GRID)
        .map(|k| f(lo + k as f64 * step))
        .collect::<Result<_>>()?;
    let minima: Vec<usize> = (0..=SEED_GRID)
        .filter(|&k| {
            let left = k == 0 || grid[k] < grid[k - 1];
            let right = k == SEED_GRID || grid[k] <= grid[k + 1];
            left && right
        })
        .collect();
    let multimodal = minima.len() > 1;
    let obj = |t: f64| f(t).unwrap_or(f64::INFINITY);
    let threshold = if multimodal {
        let best = minima
            .iter()
            .copied()
            .min_by(|&a, &b| grid[a].total_cmp(&grid[b]))
            .expect("non-empty");
        let a = lo + best.saturating_sub(1) as f64 * step;
        let b = lo + (best + 1).min(SEED_GRID) as f64 * step;
        golden_section(obj, a, b, THRESHOLD_TOLERANCE)
    } else {
        golden_section(obj, lo, hi, THRESHOLD_TOLERANCE)
    };
    Ok(ThresholdOptimum {
        threshold,
        objective_approx: f(threshold)?,
        objective: threshold_objective(threshold, priors, sigma_s2, noise, true)?,
        multimodal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerTheoryInputs {
    /// Fractional signal-energy loss from zeroed signal samples.
    pub rho: f64,
    pub pulse_energy: f64,
    pub path_gains: Vec<f64>,
    /// Residual noise variance after the front-end.
    pub sigma_e2: f64,
}

/// `Q(sqrt((1 - rho) ||w||^2 sum |alpha_l|^2 / sigma_e2))`.
pub fn theory_ber(inp: &BerTheoryInputs) -> Result<f64> {
    if !(inp.sigma_e2 > 0.0) {
        return domain(format!("sigma_e2 must be positive, got {}", inp.sigma_e2));
    }
    if !(0.0..1.0).contains(&inp.rho) {
        return param(format!("rho must lie in [0, 1), got {}", inp.rho));
    }
    if !(inp.pulse_energy >= 0.0) {
        return param("pulse energy must be non-negative");
    }
    let ch: f64 = inp.path_gains.iter().map(|a| a * a).sum();
    Ok(q(((1.0 - inp.rho) * inp.pulse_energy * ch / inp.sigma_e2).sqrt()))
}

/// BER of the conventional correlator over a unit-energy link with noise
/// variance `sigma_n2`.
pub fn awgn_theory_ber(sigma_n2: f64) -> Result<f64> {
    theory_ber(&BerTheoryInputs {
        rho: 0.0,
        pulse_energy: 1.0,
        path_gains: vec![1.0],
        sigma_e2: sigma_n2,
    })
}

/// Lag-1 correlation `sum x[k] x[k+1] / sqrt(sum_{k<N-1} x^2 * sum_{k>0} x^2)`.
pub fn lag1_correlation(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return param("lag-1 correlation needs at least two samples");
    }
    let n = x.len();
    let head: f64 = x[..n - 1].iter().map(|v| v * v).sum();
    let tail: f64 = x[1..].iter().map(|v| v * v).sum();
    if !(head > 0.0 && tail > 0.0) {
        return domain("lag-1 correlation of a zero-energy signal");
    }
    let cross: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
    Ok((cross / (head * tail).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    /// Samples per frame.
    pub omega: usize,
    /// Signal samples per frame, `L * omega_w`.
    pub omega_s: usize,
    /// Impulse samples per frame, `ceil(p * omega)`.
    pub omega_i: usize,
    /// Impulse samples per cluster, `omega_i / L`.
    pub omega_i_tilde: f64,
    /// Chance a single cluster holds an impulse.
    pub p_si: f64,
    /// `sum_{k=1..L} C(L,k) p_si^k (1 - p_si)^(L-k)`.
    pub p_sik: f64,
    /// The individual binomial terms, `k = 1..=L`.
    pub p_sik_terms: Vec<f64>,
    pub energy_loss_min: f64,
    pub energy_loss_max: f64,
    /// `p_sik` times the midpoint of the per-cluster loss bounds.
    pub e_s_loss: f64,
    /// `omega_i_tilde >= omega_w`: clusters are not sparse relative to impulses.
    pub regime_violation: bool,
}

fn binomial_terms(l: usize, p: f64) -> Vec<f64> {
    // Built with running coefficients in log space to stay finite for large L.
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut ln_c = 0.0;
    (1..=l)
        .map(|k| {
            ln_c += ((l - k + 1) as f64).ln() - (k as f64).ln();
            let t = ln_c + k as f64 * ln_p + (l - k) as f64 * ln_q;
            if p == 0.0 {
                0.0
            } else if p == 1.0 {
                if k == l { 1.0 } else { 0.0 }
            } else {
                t.exp()
            }
        })
        .collect()
}

/// Overlap combinatorics between signal clusters and impulse samples.
pub fn overlap_stats(
    cfg: &FrameConfig,
    omega_w: usize,
    l: usize,
    p: f64,
    h: &ChannelRealization,
    w: &Waveform,
) -> Result<OverlapStats> {
    if omega_w == 0 || l == 0 {
        return param("omega_w and L must be at least 1");
    }
    if !(0.0..=1.0).contains(&p) {
        return param("impulse probability must lie in [0, 1]");
    }
    let omega = cfg.samples_per_frame();
    let omega_s = l * omega_w;
    let omega_i = (p * omega as f64 - 1e-9).ceil().max(0.0) as usize;
    let omega_i_tilde = omega_i as f64 / l as f64;
    let regime_violation = omega_i_tilde >= omega_w as f64;
    if regime_violation {
        log::warn!("impulse occupancy {omega_i_tilde} per cluster reaches the pulse length {omega_w}");
    }
    if omega_s > omega {
        log::warn!("signal occupies {omega_s} of {omega} samples");
    }
    let p_si = (omega_i_tilde / omega_w as f64).min(1.0);
    let p_sik_terms = binomial_terms(l, p_si);
    let p_sik = p_sik_terms.iter().sum::<f64>().clamp(0.0, 1.0);
    let mags = |v: &[f64]| -> (f64, f64) {
        v.iter()
            .map(|x| x.abs())
            .filter(|x| *x > 0.0)
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (a_min, a_max) = mags(h.gains());
    let (w_min, w_max) = mags(w.samples());
    let (a_min, w_min) = (if a_min.is_finite() { a_min } else { 0.0 }, if w_min.is_finite() { w_min } else { 0.0 });
    let energy_loss_min = (a_min * w_min).powi(2);
    let energy_loss_max = (a_max * w_max).powi(2);
    Ok(OverlapStats {
        omega,
        omega_s,
        omega_i,
        omega_i_tilde,
        p_si,
        p_sik,
        p_sik_terms,
        energy_loss_min,
        energy_loss_max,
        e_s_loss: p_sik * 0.5 * (energy_loss_min + energy_loss_max),
        regime_violation,
    })
}

/// `||s - s_hat||^2 / N`.
pub fn mse(s: &[f64], s_hat: &[f64]) -> Result<f64> {
    if s.len() != s_hat.len() {
        return param(format!("length mismatch: {} vs {}", s.len(), s_hat.len()));
    }
    if s.is_empty() {
        return param("mse of empty signals");
    }
    Ok(s.iter().zip(s_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / s.len() as f64)
}

/// MSE after each CDA zeroing, starting from the untouched input `r`.
pub fn mse_trace(r: &[f64], s: &[f64], zeroed: &[usize]) -> Result<Vec<f64>> {
    let n = r.len() as f64;
    let mut err = mse(s, r)? * n;
    let mut out = Vec::with_capacity(zeroed.len() + 1);
    out.push(err / n);
    for &i in zeroed {
        err += s[i] * s[i] - (r[i] - s[i]) * (r[i] - s[i]);
        out.push(err.max(0.0) / n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::awgn_channel;
    use crate::waveform::{generate_pulse, PulseParams};

    fn noise(snr_db: f64, sinr_db: f64, p: f64) -> NoiseParams {
        crate::noise::noise_params_from_budget(crate::noise::LinkBudget { snr_db, sinr_db }, p).unwrap()
    }

    #[test]
    fn q_basics() {
        assert_eq!(q(0.0), 0.5);
        for x in [0.1, 0.7, 1.3, 2.9, 5.0] {
            assert!((q(x) + q(-x) - 1.0).abs() < 1e-15);
        }
        assert!(q_approx(0.0).is_err());
        assert!(q_approx(-1.0).is_err());
    }

    #[test]
    fn q_approx_is_monotone() {
        let mut prev = f64::INFINITY;
        for k in 1..=1000 {
            let v = q_approx(k as f64 * 0.01).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn detection_limits() {
        let mut inp = DetectionProbInputs {
            mu: 0.0,
            rho_s: 0.5,
            sigma_s2: 1.0,
            sigma_n2: 0.01,
            sigma_i2: 1e4,
            p: 0.01,
        };
        assert_eq!(prob_false_alarm(&inp).unwrap(), 1.0);
        assert_eq!(prob_miss(&inp).unwrap(), 0.0);
        inp.mu = 1e3;
        assert!(prob_false_alarm(&inp).unwrap() < 1e-300);
        inp.mu = 0.3;
        inp.sigma_i2 = 1e300;
        assert!(prob_miss(&inp).unwrap() < 1e-12);
        let deg = DetectionProbInputs { rho_s: 1.0, sigma_n2: 0.0, ..inp };
        assert!(matches!(prob_false_alarm(&deg), Err(Error::Domain(_))));
        assert!(prob_false_alarm(&DetectionProbInputs { rho_s: 1.5, ..inp }).is_err());
    }

    #[test]
    fn detection_probabilities_are_monotone_in_mu() {
        let base = DetectionProbInputs {
            mu: 0.0,
            rho_s: 0.4,
            sigma_s2: 1.0,
            sigma_n2: 0.1,
            sigma_i2: 1e3,
            p: 0.01,
        };
        let (mut pf, mut pm) = (f64::INFINITY, -1.0);
        for k in 0..50 {
            let inp = DetectionProbInputs { mu: k as f64 * 0.2, ..base };
            let (f, m) = (prob_false_alarm(&inp).unwrap(), prob_miss(&inp).unwrap());
            assert!(f <= pf && m >= pm);
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&m));
            // Miss rule sees the larger variance, hence the smaller Q argument.
            assert!(inp.impulse_diff_variance() > inp.signal_diff_variance());
            pf = f;
            pm = m;
        }
    }

    #[test]
    fn blanking_limits() {
        let n = noise(20.0, -40.0, 0.01);
        let (f, m) = blanking_pf_pm(1e6, 1.0, &n).unwrap();
        assert!(f < 1e-300 && (m - 1.0).abs() < 1e-12);
        let (f, m) = blanking_pf_pm(1e-12, 1.0, &n).unwrap();
        assert!((f - 1.0).abs() < 1e-9 && m < 1e-9);
        assert!(blanking_pf_pm(0.0, 1.0, &n).is_err());
        let (f, m) = blanking_pf_pm(4.0, 1.0, &n).unwrap();
        assert!((f - 2.0 * q(4.0 / 1.01f64.sqrt())).abs() < 1e-15);
        assert!((m - (1.0 - 2.0 * q(4.0 / 101.01f64.sqrt()))).abs() < 1e-15);
    }

    #[test]
    fn theory_ber_values() {
        let base = BerTheoryInputs {
            rho: 0.0,
            pulse_energy: 1.0,
            path_gains: vec![0.6, 0.8],
            sigma_e2: 1.0,
        };
        assert!((theory_ber(&base).unwrap() - q(1.0)).abs() < 1e-15);
        let mut hi = base.clone();
        hi.sigma_e2 = 1e30;
        assert!((theory_ber(&hi).unwrap() - 0.5).abs() < 1e-12);
        assert!(theory_ber(&BerTheoryInputs { sigma_e2: 0.0, ..base.clone() }).is_err());
        assert!(theory_ber(&BerTheoryInputs { rho: 1.0, ..base.clone() }).is_err());
        let worse = BerTheoryInputs { rho: 0.3, ..base.clone() };
        assert!(theory_ber(&worse).unwrap() > theory_ber(&base).unwrap());
        let stronger = BerTheoryInputs { path_gains: vec![1.0, 1.0], ..base.clone() };
        assert!(theory_ber(&stronger).unwrap() < theory_ber(&base).unwrap());
    }

    #[test]
    fn lag1_cases() {
        assert!((lag1_correlation(&[2.0; 10]).unwrap() - 1.0).abs() < 1e-15);
        let alt: Vec<f64> = (0..10).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((lag1_correlation(&alt).unwrap() + 1.0).abs() < 1e-15);
        assert!(lag1_correlation(&[0.0; 5]).is_err());
        assert!(lag1_correlation(&[1.0]).is_err());
    }

    #[test]
    fn overlap_cases() {
        let pulse = PulseParams::new(0.4e-9, 16e9).unwrap();
        let w = generate_pulse(&pulse).unwrap();
        let cfg = FrameConfig {
            frame_duration: 10e-9,
            chip_duration: 1e-9,
            th_cardinality: 3,
            sample_rate: 16e9,
            frames_per_symbol: 1,
        };
        let h = awgn_channel();
        let s = overlap_stats(&cfg, w.len(), 1, 0.01, &h, &w).unwrap();
        assert_eq!((s.omega, s.omega_s, s.omega_i), (160, 17, 2));
        assert!((s.p_sik - s.p_si).abs() < 1e-15);
        assert!((s.p_si - 2.0 / 17.0).abs() < 1e-15);
        let z = overlap_stats(&cfg, w.len(), 1, 0.0, &h, &w).unwrap();
        assert_eq!((z.omega_i, z.p_si, z.p_sik), (0, 0.0, 0.0));
        let mut prev = f64::INFINITY;
        for l in 1..=20 {
            let s = overlap_stats(&cfg, w.len(), l, 0.01, &h, &w).unwrap();
            assert!(s.p_sik < prev, "L = {l}");
            let closed = 1.0 - (1.0 - s.p_si).powi(l as i32);
            assert!((s.p_sik - closed).abs() < 1e-12);
            prev = s.p_sik;
        }
        let dense = overlap_stats(&cfg, 2, 1, 0.5, &h, &w).unwrap();
        assert!(dense.regime_violation);
        assert!(dense.p_si <= 1.0);
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert!(mse(&[0.0; 4], &[1.0; 3]).is_err());
        let r = [9.0, 0.5, -7.0, 0.1];
        let s = [0.0, 0.5, 0.0, 0.0];
        let t = mse_trace(&r, &s, &[0, 2]).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t[2] - mse(&s, &[0.0, 0.5, 0.0, 0.1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn threshold_optimum_matches_grid() {
        let n = noise(0.0, -40.0, 0.01);
        let priors = ThresholdPriors::default();
        let opt = optimal_threshold(priors, 1.0, &n).unwrap();
        assert!(!opt.multimodal);
        let (lo, hi) = threshold_bracket(1.0, &n);
        let steps = ((hi - lo) / 1e-3) as usize;
        let (mut best_t, mut best) = (0.0, f64::INFINITY);
        for k in 0..=steps {
            let t = lo + k as f64 * 1e-3;
            let v = threshold_objective(t, priors, 1.0, &n, false).unwrap();
            if v < best {
                best = v;
                best_t = t;
            }
        }
        assert!((opt.threshold - best_t).abs() < 1e-2);
        assert!(opt.objective_approx <= best + 1e-9);
    }

    #[test]
    fn threshold_without_impulses_runs_to_bracket_end() {
        let n = noise(0.0, -40.0, 0.0);
        let opt = optimal_threshold(ThresholdPriors::default(), 1.0, &n).unwrap();
        let (_, hi) = threshold_bracket(1.0, &n);
        assert!(opt.threshold > 0.5 * hi);
        assert!(opt.objective - threshold_objective(hi, ThresholdPriors::default(), 1.0, &n, true).unwrap() < 1e-12);
    }
}
