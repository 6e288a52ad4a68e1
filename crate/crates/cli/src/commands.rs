use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwbsim_core::analysis::{
    awgn_theory_ber, lag1_correlation, overlap_stats, prob_false_alarm, prob_miss, DetectionProbInputs,
};
use uwbsim_core::channel::awgn_channel;
use uwbsim_core::harness::{run_ber_sweep, run_mse_convergence, run_threshold_study, Link};
use uwbsim_core::noise::{noise_params_from_budget, LinkBudget, SIGNAL_POWER};
use uwbsim_core::report::{write_ber_csv, write_curve_csv, write_mse_csv, write_threshold_csv, CurvePoint};
use uwbsim_core::{ReceiverSpec, ThresholdPriors};

use crate::config::{self, Overrides};
use crate::manifest::{write_atomic, Job, LowConfidence, RunManifest, MANIFEST_NAME};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<uwbsim_core::Error> for CliError {
    fn from(e: uwbsim_core::Error) -> Self {
        match e {
            uwbsim_core::Error::Domain(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// TH-BPSK impulse-radio link simulator.
#[derive(Debug, Parser)]
#[command(name = "uwbsim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER versus SNR for each receiver.
    Ber(BerArgs),
    /// Per-iteration CDA MSE for a list of mu values.
    Mse(MseArgs),
    /// Optimal blanking threshold lookup table.
    Threshold(ThresholdArgs),
    /// Analytic curves: theory BER, false-alarm and miss rates, overlap.
    Theory(TheoryArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, env = "UWBSIM_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replay the job recorded in a manifest.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Exit 0 even when some points are low-confidence.
    #[arg(long)]
    pub warn_only: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Preset name (`awgn`, `cm1`) or TOML file.
    #[arg(long, default_value = "awgn")]
    pub config: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_errors: Option<u64>,
    #[arg(long)]
    pub max_bits: Option<u64>,
    /// Comma-separated, e.g. `conventional,blanking:2.5,cda:kappa=2.5`.
    #[arg(long, value_delimiter = ',')]
    pub receivers: Option<Vec<ReceiverSpec>>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub sinr: Option<f64>,
}

impl SimArgs {
    fn resolve(&self) -> Result<uwbsim_core::SimConfig, CliError> {
        let o = Overrides {
            seed: self.seed,
            min_errors: self.min_errors,
            max_bits: self.max_bits,
            receivers: self.receivers.clone(),
            p: self.p,
            snr_db: self.snr.clone(),
            sinr_db: self.sinr,
        };
        o.apply(config::load(&self.config)?)
    }
}

#[derive(Debug, Args)]
pub struct BerArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MseArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Comma-separated mu values.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.3,0.4,0.5,1,2,3")]
    pub mu: Vec<f64>,
    /// Frames averaged per mu.
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-2,0,5,10")]
    pub snr: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -40.0)]
    pub sinr: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
    /// Prior weight of the signal hypothesis; the impulse prior is its complement.
    #[arg(long)]
    pub prior_signal: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Mu grid for the false-alarm and miss curves.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5,1,2,3")]
    pub mu: Vec<f64>,
    /// SNR at which the mu curves are evaluated.
    #[arg(long, allow_negative_numbers = true, default_value_t = 20.0)]
    pub mu_snr: f64,
    /// Largest cluster count in the overlap curve.
    #[arg(long, default_value_t = 20)]
    pub l_max: usize,
    #[command(flatten)]
    pub common: Common,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn csv_bytes<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
    Ok(buf)
}

struct Outcome {
    files: Vec<(String, Vec<u8>)>,
    low_confidence: Vec<LowConfidence>,
}

fn execute(job: &Job) -> Result<Outcome, CliError> {
    match job {
        Job::Ber { config } => {
            let curve = run_ber_sweep(config)?;
            let low_confidence = curve
                .points
                .iter()
                .flat_map(|p| {
                    p.receivers.iter().filter(|r| r.low_confidence).map(move |r| LowConfidence {
                        snr_db: p.snr_db,
                        receiver: r.label.clone(),
                        bits: r.bits,
                        errors: r.errors,
                    })
                })
                .collect();
            for p in &curve.points {
                for r in p.receivers.iter().filter(|r| r.above_half) {
                    log::warn!("{} at {} dB has BER {} above 0.5", r.label, p.snr_db, r.ber);
                }
            }
            let csv = csv_bytes(|b| write_ber_csv(&curve, b))?;
            Ok(Outcome { files: vec![("ber.csv".into(), csv)], low_confidence })
        }
        Job::Mse { mu, trials, config } => {
            let rows = run_mse_convergence(config, mu, *trials)?;
            let csv = csv_bytes(|b| write_mse_csv(&rows, b))?;
            Ok(Outcome { files: vec![("mse.csv".into(), csv)], low_confidence: vec![] })
        }
        Job::Threshold { snr_db, sinr_db, p, priors } => {
            let rows = run_threshold_study(snr_db, &[*sinr_db], *p, *priors)?;
            let csv = csv_bytes(|b| write_threshold_csv(&rows, b))?;
            Ok(Outcome { files: vec![("threshold.csv".into(), csv)], low_confidence: vec![] })
        }
        Job::Theory { snr_db, mu, l_max, mu_snr_db, config } => {
            let points = theory_curves(config, snr_db, mu, *mu_snr_db, *l_max)?;
            let csv = csv_bytes(|b| write_curve_csv(&points, b))?;
            Ok(Outcome { files: vec![("theory.csv".into(), csv)], low_confidence: vec![] })
        }
    }
}

fn theory_curves(
    cfg: &uwbsim_core::SimConfig,
    snr_db: &[f64],
    mu: &[f64],
    mu_snr_db: f64,
    l_max: usize,
) -> Result<Vec<CurvePoint>, CliError> {
    let link = Link::new(cfg)?;
    let mut out = Vec::new();
    for &snr in snr_db {
        let noise = noise_params_from_budget(LinkBudget { snr_db: snr, sinr_db: cfg.sinr_db }, cfg.p)?;
        out.push(CurvePoint { curve: "theory_ber".into(), x: snr, y: awgn_theory_ber(noise.sigma_n2)? });
    }
    let noise = noise_params_from_budget(LinkBudget { snr_db: mu_snr_db, sinr_db: cfg.sinr_db }, cfg.p)?;
    let rho_s = lag1_correlation(&link.pulse)?;
    for &m in mu {
        let inp = DetectionProbInputs {
            mu: m,
            rho_s,
            sigma_s2: SIGNAL_POWER,
            sigma_n2: noise.sigma_n2,
            sigma_i2: noise.sigma_i2,
            p: noise.p,
        };
        out.push(CurvePoint { curve: "p_f".into(), x: m, y: prob_false_alarm(&inp)? });
        out.push(CurvePoint { curve: "p_m".into(), x: m, y: prob_miss(&inp)? });
    }
    let omega_w = link.pulse.len();
    for l in 1..=l_max {
        let st = overlap_stats(&cfg.frame, omega_w, l, cfg.p, &awgn_channel(), &link.pulse)?;
        out.push(CurvePoint { curve: "p_sik".into(), x: l as f64, y: st.p_sik });
    }
    Ok(out)
}

fn run_job(job: Job, common: &Common) -> Result<ExitCode, CliError> {
    let started = now();
    let outcome = match common.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| execute(&job))?,
        None => execute(&job)?,
    };
    let dir = &common.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    for (name, bytes) in &outcome.files {
        write_atomic(&dir.join(name), bytes)?;
    }
    let master_seed = match &job {
        Job::Ber { config } | Job::Mse { config, .. } | Job::Theory { config, .. } => Some(config.master_seed),
        Job::Threshold { .. } => None,
    };
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        master_seed,
        started,
        finished: now(),
        outputs: outcome.files.iter().map(|(n, _)| n.clone()).collect(),
        low_confidence: outcome.low_confidence,
        job,
    };
    let path = manifest.write(dir)?;
    for (name, _) in &outcome.files {
        println!("{}", dir.join(name).display());
    }
    println!("{}", path.display());
    if manifest.low_confidence.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for lc in &manifest.low_confidence {
        log::warn!("low confidence: {} at {} dB ({} errors in {} bits)", lc.receiver, lc.snr_db, lc.errors, lc.bits);
    }
    Ok(if common.warn_only { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn resumed(path: &Path) -> Result<Job, CliError> {
    let m = RunManifest::read(path)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        log::warn!("manifest written by version {}, replaying with {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    Ok(m.job)
}

pub fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (job, common) = match cli.command {
        Command::Ber(a) => {
            let job = match &a.common.resume {
                Some(p) => resumed(p)?,
                None => Job::Ber { config: a.sim.resolve()? },
            };
            (job, a.common)
        }
        Command::Mse(a) => {
            let job = match &a.common.resume {
                Some(p) => resumed(p)?,
                None => Job::Mse { mu: a.mu.clone(), trials: a.trials, config: a.sim.resolve()? },
            };
            (job, a.common)
        }
        Command::Threshold(a) => {
            let job = match &a.common.resume {
                Some(p) => resumed(p)?,
                None => {
                    let priors = match a.prior_signal {
                        Some(s) if (0.0..=1.0).contains(&s) => ThresholdPriors { signal: s, impulse: 1.0 - s },
                        Some(s) => return Err(CliError::Config(format!("--prior-signal must lie in [0, 1], got {s}"))),
                        None => ThresholdPriors::default(),
                    };
                    Job::Threshold { snr_db: a.snr.clone(), sinr_db: a.sinr, p: a.p, priors }
                }
            };
            (job, a.common)
        }
        Command::Theory(a) => {
            let job = match &a.common.resume {
                Some(p) => resumed(p)?,
                None => {
                    let config = a.sim.resolve()?;
                    Job::Theory {
                        snr_db: config.snr_db.clone(),
                        mu: a.mu.clone(),
                        l_max: a.l_max,
                        mu_snr_db: a.mu_snr,
                        config,
                    }
                }
            };
            (job, a.common)
        }
    };
    if common.resume.is_some() && common.out_dir.join(MANIFEST_NAME) == *common.resume.as_ref().unwrap() {
        log::info!("replaying into the manifest's own directory");
    }
    run_job(job, &common)
}
