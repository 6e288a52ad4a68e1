//! CSV schemas shared by the harness and the command-line front-end.
//!
//! Floats are written with 17 significant digits so every value
//! round-trips exactly and output files are byte-stable.

use std::io::Write;

use crate::harness::{BerCurve, MseRow, ThresholdRow};

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const BER_HEADER: [&str; 8] = ["snr_db", "receiver", "ber", "ci_lo", "ci_hi", "bits", "errors", "theory_ber"];

pub fn write_ber_csv<W: Write>(curve: &BerCurve, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BER_HEADER)?;
    for point in &curve.points {
        for row in &point.receivers {
            w.write_record([
                fmt_f64(point.snr_db),
                row.label.clone(),
                fmt_f64(row.ber),
                fmt_f64(row.ci.0),
                fmt_f64(row.ci.1),
                row.bits.to_string(),
                row.errors.to_string(),
                fmt_f64(row.theory_ber),
            ])?;
        }
    }
    w.flush()
}

pub fn write_mse_csv<W: Write>(rows: &[MseRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu", "iteration", "mse"])?;
    for r in rows {
        w.write_record([fmt_f64(r.mu), r.iteration.to_string(), fmt_f64(r.mse)])?;
    }
    w.flush()
}

pub fn write_threshold_csv<W: Write>(rows: &[ThresholdRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snr_db", "t_opt", "objective_value"])?;
    for r in rows {
        w.write_record([fmt_f64(r.snr_db), fmt_f64(r.t_opt), fmt_f64(r.objective)])?;
    }
    w.flush()
}

/// One sample of an analytic curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub curve: String,
    pub x: f64,
    pub y: f64,
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve", "x", "y"])?;
    for p in points {
        w.write_record([p.curve.clone(), fmt_f64(p.x), fmt_f64(p.y)])?;
    }
    w.flush()
}
