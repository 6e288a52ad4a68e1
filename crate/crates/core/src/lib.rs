//! Link-level simulator for time-hopping BPSK impulse radio under
//! Bernoulli-Gaussian impulse noise, with blanking and cluster-detection
//! front-ends.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod harness;
pub mod noise;
pub mod presets;
pub mod receiver;
pub mod report;
pub mod rng;
pub mod waveform;

pub use analysis::{OverlapStats, ThresholdOptimum, ThresholdPriors};
pub use channel::{ChannelRealization, SvChannelParams};
pub use error::{Error, Result};
pub use harness::{BerCurve, BerPoint, ChannelModel, MseRow, ReceiverSpec, SimConfig, SvProfile, ThresholdRow, TrialResult};
pub use noise::{LinkBudget, NoiseParams};
pub use receiver::{BlankingParams, CdaDiagnostics, CdaParams};
pub use rng::Seed;
pub use waveform::{Bit, FrameConfig, PulseParams, ThCode, Waveform};
