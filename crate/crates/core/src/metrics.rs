//! Relative error measures in time and frequency domain, and result tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::{spectral_norm, RMatrix};
use crate::tf::{Level1Sweep, Level2Sweep};

fn check_shape(y: &RMatrix, yhat: &RMatrix) -> Result<()> {
    if y.shape() != yhat.shape() {
        return Err(MorError::dims(
            "output trajectories",
            format!("{}x{}", y.nrows(), y.ncols()),
            format!("{}x{}", yhat.nrows(), yhat.ncols()),
        ));
    }
    Ok(())
}

/// Outputs with `|y_j(t)|` below this fraction of `max |y|` are left out of
/// the pointwise error.
pub const ZERO_GUARD: f64 = 1e-14;

/// `max_j |y_j(t) - yhat_j(t)| / |y_j(t)|` at every time sample. A time at
/// which every output is guarded as zero gives `None`.
pub fn relerr_pointwise(y: &RMatrix, yhat: &RMatrix) -> Result<Vec<Option<f64>>> {
    check_shape(y, yhat)?;
    let floor = ZERO_GUARD * y.amax();
    Ok((0..y.ncols())
        .map(|t| {
            (0..y.nrows())
                .filter(|&j| y[(j, t)].abs() > floor)
                .map(|j| (y[(j, t)] - yhat[(j, t)]).abs() / y[(j, t)].abs())
                .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))))
        })
        .collect())
}

/// `||vec(y - yhat)||_2 / ||vec(y)||_2`.
pub fn relerr_l2(y: &RMatrix, yhat: &RMatrix) -> Result<f64> {
    check_shape(y, yhat)?;
    let den = y.norm();
    if den == 0.0 {
        return Err(MorError::ZeroReference);
    }
    Ok((y - yhat).norm() / den)
}

/// `||vec(y - yhat)||_inf / ||vec(y)||_inf`.
pub fn relerr_linf(y: &RMatrix, yhat: &RMatrix) -> Result<f64> {
    check_shape(y, yhat)?;
    let den = y.amax();
    if den == 0.0 {
        return Err(MorError::ZeroReference);
    }
    Ok((y - yhat).amax() / den)
}

/// `||G1 - G1hat||_2 / ||G1||_2` per frequency; `None` where either is unavailable.
pub fn relerr_freq1(full: &Level1Sweep, red: &Level1Sweep) -> Vec<Option<f64>> {
    full.values
        .iter()
        .zip(&red.values)
        .map(|(g, gh)| match (g, gh) {
            (Some(g), Some(gh)) => {
                let d = spectral_norm(g);
                (d > 0.0).then(|| spectral_norm(&(g - gh)) / d)
            }
            _ => None,
        })
        .collect()
}

/// Pointwise relative errors of the level-2 response, row-major in `omegas1`.
pub fn relerr_freq2(full: &Level2Sweep, red: &Level2Sweep) -> Vec<Vec<Option<f64>>> {
    (0..full.omegas1.len())
        .map(|i| {
            (0..full.omegas2.len())
                .map(|j| match (full.get(i, j), red.get(i, j)) {
                    (Some(g), Some(gh)) => {
                        let d = spectral_norm(&g);
                        (d > 0.0).then(|| spectral_norm(&(&g - &gh)) / d)
                    }
                    _ => None,
                })
                .collect()
        })
        .collect()
}

/// `max_w ||G1 - G1hat|| / max_w ||G1||` over the sampled frequencies.
/// A reduced model singular somewhere on the grid scores infinity.
pub fn hinf_relerr1(full: &Level1Sweep, red: &Level1Sweep) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (g, gh) in full.values.iter().zip(&red.values) {
        let Some(g) = g else { continue };
        den = den.max(spectral_norm(g));
        match gh {
            Some(gh) => num = num.max(spectral_norm(&(g - gh))),
            None => return f64::INFINITY,
        }
    }
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

pub fn hinf_relerr2(full: &Level2Sweep, red: &Level2Sweep) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..full.omegas1.len() {
        for j in 0..full.omegas2.len() {
            let Some(g) = full.get(i, j) else { continue };
            den = den.max(spectral_norm(&g));
            match red.get(i, j) {
                Some(gh) => num = num.max(spectral_norm(&(&g - &gh))),
                None => return f64::INFINITY,
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

/// One row of the comparison table. Failed time simulations report infinity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: String,
    pub relerr_l2: f64,
    pub relerr_linf: f64,
    pub relerr_hinf1: f64,
    pub relerr_hinf2: f64,
    /// false when the reduced simulation blew up or failed
    pub stable: bool,
    pub note: Option<String>,
}

impl ErrorReport {
    pub fn failed(method: &str, note: String) -> Self {
        ErrorReport {
            method: method.to_string(),
            relerr_l2: f64::INFINITY,
            relerr_linf: f64::INFINITY,
            relerr_hinf1: f64::INFINITY,
            relerr_hinf2: f64::INFINITY,
            stable: false,
            note: Some(note),
        }
    }
}

fn fmt_full(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_short(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_nan() {
        "-".into()
    } else {
        // two-digit exponent: 8.1604e-07
        let t = format!("{v:.4e}");
        match t.split_once('e') {
            Some((m, e)) => {
                let (sign, digits) = e.strip_prefix('-').map_or(("+", e), |d| ("-", d));
                format!("{m}e{sign}{digits:0>2}")
            }
            None => t,
        }
    }
}

pub const TABLE_HEADER: [&str; 5] = [
    "method",
    "relerr_L2",
    "relerr_Linf",
    "relerr_Hinf1",
    "relerr_Hinf2",
];

/// CSV with full precision (17 significant digits).
pub fn table_csv(reports: &[ErrorReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| MorError::InvalidInput(format!("csv: {e}"));
    w.write_record(TABLE_HEADER).map_err(err)?;
    for r in reports {
        w.write_record([
            r.method.clone(),
            fmt_full(r.relerr_l2),
            fmt_full(r.relerr_linf),
            fmt_full(r.relerr_hinf1),
            fmt_full(r.relerr_hinf2),
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| MorError::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Fixed-width text table with 5 significant digits.
pub fn table_text(reports: &[ErrorReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.method.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>12}  {:>12}  {:>12}  {:>12}",
        TABLE_HEADER[0], TABLE_HEADER[1], TABLE_HEADER[2], TABLE_HEADER[3], TABLE_HEADER[4]
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  {:>12}  {:>12}",
            r.method,
            fmt_short(r.relerr_l2),
            fmt_short(r.relerr_linf),
            fmt_short(r.relerr_hinf1),
            fmt_short(r.relerr_hinf2)
        );
    }
    out
}

/// `(csv, text)` renderings of the same table.
pub fn emit_table(reports: &[ErrorReport]) -> Result<(String, String)> {
    Ok((table_csv(reports)?, table_text(reports)))
}
