//! Independent numerical oracles for the closed forms and generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use uwbsim_core::analysis::{
    blanking_pf_pm, lag1_correlation, overlap_stats, prob_false_alarm, prob_miss, q, q_approx,
    DetectionProbInputs,
};
use uwbsim_core::channel::{awgn_channel, draw_sv_channel, propagate, ChannelRealization, SvChannelParams};
use uwbsim_core::noise::{awgn_noise, bg_impulse, NoiseParams};
use uwbsim_core::receiver::make_template;
use uwbsim_core::waveform::{generate_pulse, modulate_frame, monocycle, Bit, FrameConfig, PulseParams};
use uwbsim_core::{Seed, Waveform};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn q_by_quadrature(x: f64) -> f64 {
    let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    simpson(phi, x, x + 40.0, 400_000)
}

#[test]
fn q_matches_quadrature() {
    for x in [0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0] {
        let want = q_by_quadrature(x);
        assert!((q(x) - want).abs() <= 1e-10 + 1e-8 * want, "Q({x})");
    }
    assert!((q(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
    assert!((q(3.0) - 1.349_898_031_630_09e-3).abs() < 1e-14);
}

#[test]
fn q_approximation_accuracy() {
    // Tight near the body of the distribution, drifting to the asymptotic
    // 1/1.135 ratio in the far tail.
    let mut prev = f64::INFINITY;
    for k in 1..=1000 {
        let x = k as f64 * 0.01;
        let v = q_approx(x).unwrap();
        assert!(v < prev);
        prev = v;
        let rel = (v - q(x)).abs() / q(x);
        if (0.5..=2.0).contains(&x) {
            assert!(rel < 0.02, "x = {x}, rel = {rel}");
        }
        if x <= 6.0 {
            assert!(rel < 0.1, "x = {x}, rel = {rel}");
        }
    }
    assert!(q_approx(0.0).is_err());
    assert!(q_approx(-1.0).is_err());
}

#[test]
fn pulse_energy_by_fine_quadrature() {
    let tau = 0.4e-9;
    let params = PulseParams::new(tau, 16e9).unwrap();
    let w = generate_pulse(&params).unwrap();
    // Continuous energy of the same shape, scaled identically.
    let hw = params.support_half_width;
    let cont = simpson(|t| monocycle(t / tau).powi(2), -hw, hw, 200_000);
    let total = simpson(|t| monocycle(t / tau).powi(2), -8.0 * tau, 8.0 * tau, 200_000);
    assert!(1.0 - cont / total <= 1e-6 * (1.0 + 1e-3));
    assert!((w.energy() - 1.0).abs() < 1e-12);
    // Sampled energy at 16 GS/s tracks the Riemann sum of the continuous shape.
    let dt = 1.0 / 16e9;
    let k = params.half_width_samples() as i64;
    let raw: Vec<f64> = (-k..=k).map(|n| monocycle(n as f64 * dt / tau)).collect();
    let e_raw: f64 = raw.iter().map(|v| v * v).sum();
    assert!((e_raw * dt / total - 1.0).abs() < 1e-3);
    for (a, b) in w.iter().zip(&raw) {
        assert!((a - b / e_raw.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn noise_moments() {
    let n = 1_000_000;
    let x = awgn_noise(n, 0.25, 16e9, Seed(9)).unwrap();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 3.0 * (0.25f64 / n as f64).sqrt());
    // Var of the sample variance is 2 sigma^4 / n.
    assert!((var - 0.25).abs() < 3.0 * 0.25 * (2.0 / n as f64).sqrt());
    assert!(lag1_correlation(&x).unwrap().abs() < 3.0 / (n as f64).sqrt());

    let params = NoiseParams { sigma_n2: 0.0, sigma_i2: 100.0, p: 0.01 };
    let i = bg_impulse(n, &params, 16e9, Seed(10)).unwrap();
    let hits = i.iter().filter(|v| **v != 0.0).count() as f64;
    let sd = (n as f64 * 0.01 * 0.99).sqrt();
    assert!((hits - 0.01 * n as f64).abs() < 3.0 * sd);
    let power = i.iter().map(|v| v * v).sum::<f64>() / n as f64;
    // Var of b*g^2 per sample is p * 3 sigma^4 - (p sigma^2)^2.
    let sd_power = ((0.01 * 3.0 * 1e4 - 1.0) / n as f64).sqrt();
    assert!((power - 1.0).abs() < 3.0 * sd_power);
}

fn within_3_sigma(p: f64, hits: usize, n: usize) -> bool {
    let est = hits as f64 / n as f64;
    let sd = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
    (est - p).abs() <= 3.0 * sd
}

/// Draws adjacent-sample differences from the Gaussian models behind the
/// CDA false-alarm and miss expressions.
fn sample_diff(rng: &mut ChaCha8Rng, inp: &DetectionProbInputs, impulse: bool) -> f64 {
    // Correlated signal pair with lag-1 correlation rho_s.
    let sd_s = inp.sigma_s2.sqrt();
    let a = gauss(rng);
    let b = inp.rho_s * a + (1.0 - inp.rho_s * inp.rho_s).sqrt() * gauss(rng);
    let mut d = sd_s * (a - b) + inp.sigma_n2.sqrt() * (gauss(rng) - gauss(rng));
    if impulse {
        d += (inp.p * inp.sigma_i2).sqrt() * (gauss(rng) - gauss(rng));
    }
    d
}

#[test]
fn cda_detection_probabilities_match_sampling() {
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for (k, mu) in [0.1, 0.3, 0.6, 1.0, 2.0].into_iter().enumerate() {
        let inp = DetectionProbInputs {
            mu,
            rho_s: 0.6 - 0.1 * k as f64,
            sigma_s2: 1.0,
            sigma_n2: 0.1,
            sigma_i2: 100.0,
            p: 0.01,
        };
        let pf = prob_false_alarm(&inp).unwrap();
        let pm = prob_miss(&inp).unwrap();
        let fa = (0..n).filter(|_| sample_diff(&mut rng, &inp, false).abs() >= mu).count();
        let miss = (0..n).filter(|_| sample_diff(&mut rng, &inp, true).abs() < mu).count();
        assert!(within_3_sigma(pf, fa, n), "p_f at mu {mu}: {pf} vs {}", fa as f64 / n as f64);
        assert!(within_3_sigma(pm, miss, n), "p_m at mu {mu}: {pm} vs {}", miss as f64 / n as f64);
    }
}

#[test]
fn blanking_probabilities_match_sampling() {
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let noise = NoiseParams { sigma_n2: 0.2, sigma_i2: 300.0, p: 0.01 };
    for t in [0.5, 1.0, 2.0, 2.5, 4.0] {
        let (pf, pm) = blanking_pf_pm(t, 1.0, &noise).unwrap();
        let sd_sig = (1.0 + noise.sigma_n2).sqrt();
        let sd_imp = noise.p * noise.sigma_i2;
        let fa = (0..n).filter(|_| (sd_sig * gauss(&mut rng)).abs() >= t).count();
        let miss = (0..n)
            .filter(|_| (sd_sig * gauss(&mut rng) + sd_imp.sqrt() * gauss(&mut rng)).abs() < t)
            .count();
        assert!(within_3_sigma(pf, fa, n), "p_fT at T {t}");
        assert!(within_3_sigma(pm, miss, n), "p_mT at T {t}");
    }
}

fn dense_convolution(x: &[f64], h: &ChannelRealization) -> Vec<f64> {
    let max = h.max_delay();
    let mut dense = vec![0.0; max + 1];
    for (g, d) in h.gains().iter().zip(h.delays()) {
        dense[*d] += g;
    }
    (0..x.len())
        .map(|n| (0..=max.min(n)).map(|k| dense[k] * x[n - k]).sum())
        .collect()
}

#[test]
fn propagation_matches_dense_convolution() {
    let params = SvChannelParams::cm1_like();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = FrameConfig {
        frame_duration: 60e-9,
        chip_duration: 1e-9,
        th_cardinality: 6,
        sample_rate: 16e9,
        frames_per_symbol: 1,
    };
    let w = generate_pulse(&PulseParams::new(0.4e-9, 16e9).unwrap()).unwrap();
    for chip in 0..6 {
        let h = draw_sv_channel(&params, &mut rng).unwrap();
        let x = modulate_frame(Bit::Minus, chip, &cfg, &w).unwrap();
        let y = propagate(&x, &h);
        let want = dense_convolution(&x, &h);
        for (a, b) in y.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let phi = make_template(&w, &h, chip, &cfg).unwrap();
        for (a, b) in phi.iter().zip(&want) {
            assert!((a + b).abs() < 1e-12);
        }
    }
    let x = Waveform::new(vec![1.0, -2.0, 0.5], 16e9).unwrap();
    assert_eq!(propagate(&x, &awgn_channel()), x);
}

/// Continuous-time power-delay profile drawn without the sample grid.
fn continuous_rms_spread(p: &SvChannelParams, rng: &mut ChaCha8Rng) -> f64 {
    let big = Exp::new(p.cluster_arrival_rate).unwrap();
    let small = Exp::new(p.ray_arrival_rate).unwrap();
    let mut rays = Vec::new();
    let mut t_c = 0.0;
    while t_c <= p.max_excess_delay {
        let mut t_r = 0.0;
        while t_c + t_r <= p.max_excess_delay {
            rays.push((t_c + t_r, (-t_c / p.cluster_decay - t_r / p.ray_decay).exp()));
            t_r += small.sample(rng);
        }
        t_c += big.sample(rng);
    }
    let e: f64 = rays.iter().map(|r| r.1).sum();
    let m1 = rays.iter().map(|r| r.0 * r.1).sum::<f64>() / e;
    let m2 = rays.iter().map(|r| r.0 * r.0 * r.1).sum::<f64>() / e;
    (m2 - m1 * m1).max(0.0).sqrt()
}

#[test]
fn sv_delay_spread_matches_continuous_model() {
    let p = SvChannelParams::cm1_like();
    let n = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let stored: f64 = (0..n)
        .map(|_| draw_sv_channel(&p, &mut rng).unwrap().rms_delay_spread(p.sample_rate))
        .sum::<f64>()
        / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let cont: f64 = (0..n).map(|_| continuous_rms_spread(&p, &mut rng)).sum::<f64>() / n as f64;
    // Random tap signs make colliding rays partially cancel, so only rough agreement.
    assert!((stored * 1e9 / cont - 1.0).abs() < 0.15, "{} ns vs {cont} ns", stored * 1e9);
}

#[test]
fn sv_channels_unit_energy_and_within_span() {
    let p = SvChannelParams::cm1_like();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let h = draw_sv_channel(&p, &mut rng).unwrap();
        assert!((h.energy() - 1.0).abs() < 1e-12);
        assert!(h.max_delay() <= p.max_delay_samples());
        assert_eq!(h.delays()[0], 0);
    }
    let _: f64 = rng.random();
}

#[test]
fn overlap_binomial_sum_oracle() {
    let cfg = FrameConfig {
        frame_duration: 60e-9,
        chip_duration: 1e-9,
        th_cardinality: 6,
        sample_rate: 16e9,
        frames_per_symbol: 1,
    };
    let w = generate_pulse(&PulseParams::new(0.4e-9, 16e9).unwrap()).unwrap();
    let mut last = f64::INFINITY;
    for l in 1..=20usize {
        let gains = vec![1.0 / (l as f64).sqrt(); l];
        let delays = (0..l).map(|k| 20 * k).collect();
        let h = ChannelRealization::new(gains, delays).unwrap();
        let st = overlap_stats(&cfg, 17, l, 0.01, &h, &w).unwrap();
        // Direct sum with exact binomial coefficients.
        let p = st.p_si;
        let mut direct = 0.0;
        for k in 1..=l {
            let c: f64 = (1..=k).map(|j| (l - k + j) as f64 / j as f64).product();
            direct += c * p.powi(k as i32) * (1.0 - p).powi((l - k) as i32);
        }
        assert!((st.p_sik - direct).abs() < 1e-12);
        assert!((st.p_sik - (1.0 - (1.0 - p).powi(l as i32))).abs() < 1e-12);
        assert!(st.p_sik <= last + 1e-15, "L = {l}");
        last = st.p_sik;
    }
}
