//! Named link setups: impulse-noise AWGN and CM1-like multipath.

use crate::analysis::ThresholdPriors;
use crate::harness::{ChannelModel, ReceiverSpec, SimConfig, SvProfile, TheoryMode};
use crate::waveform::FrameConfig;

pub const SAMPLE_RATE: f64 = 16e9;
pub const PULSE_TAU: f64 = 0.4e-9;
pub const CHIP_DURATION: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 20_240_601;

fn base(frame_duration: f64, th_cardinality: usize, channel: ChannelModel, receivers: Vec<ReceiverSpec>) -> SimConfig {
    SimConfig {
        frame: FrameConfig {
            frame_duration,
            chip_duration: CHIP_DURATION,
            th_cardinality,
            sample_rate: SAMPLE_RATE,
            frames_per_symbol: 1,
        },
        pulse_tau: PULSE_TAU,
        pulse_support_half_width: None,
        channel,
        snr_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
        sinr_db: -30.0,
        p: 0.01,
        receivers,
        max_bits: 1_000_000,
        min_errors: 100,
        master_seed: DEFAULT_SEED,
        batch_size: 4096,
        theory: TheoryMode::Nominal,
        threshold_priors: ThresholdPriors::default(),
        include_baseline: true,
    }
}

/// AWGN channel, 10 ns frames, three chips.
pub fn awgn() -> SimConfig {
    base(
        10e-9,
        3,
        ChannelModel::Awgn,
        vec![
            ReceiverSpec::Conventional,
            ReceiverSpec::Blanking { threshold: Some(2.5), t_opt: false },
            ReceiverSpec::Blanking { threshold: Some(4.0), t_opt: false },
            ReceiverSpec::Cda { mu: None, kappa: Some(2.5) },
        ],
    )
}

/// CM1-like multipath, 60 ns frames, six chips.
pub fn cm1() -> SimConfig {
    base(
        60e-9,
        6,
        ChannelModel::Sv(SvProfile::cm1_like()),
        vec![
            ReceiverSpec::Conventional,
            ReceiverSpec::Blanking { threshold: Some(2.5), t_opt: false },
            ReceiverSpec::Cda { mu: Some(0.3), kappa: None },
        ],
    )
}

pub fn by_name(name: &str) -> Option<SimConfig> {
    match name {
        "awgn" => Some(awgn()),
        "cm1" => Some(cm1()),
        _ => None,
    }
}
