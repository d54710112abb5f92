//! Sup-norm errors against the Blasius flow and log-log decay fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::reconstruct::{reference_at, PhysicalSlice};
use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};
use crate::lsq;

/// Derivative pairs `(i, j)` for `d_x^i d_y^j`.
pub const PAIRS: [(u8, u8); 4] = [(0, 0), (0, 1), (0, 2), (1, 0)];

/// `|| d_x^i d_y^j (u - u_bar) ||_inf` at one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub x: f64,
    pub norm_00: f64,
    pub norm_01: f64,
    pub norm_02: f64,
    pub norm_10: f64,
}

impl NormRow {
    pub fn get(&self, pair: (u8, u8)) -> f64 {
        match pair {
            (0, 0) => self.norm_00,
            (0, 1) => self.norm_01,
            (0, 2) => self.norm_02,
            (1, 0) => self.norm_10,
            _ => panic!("unsupported derivative pair {pair:?}"),
        }
    }
}

/// Expected exponent `-1 - i - j/2`.
pub fn predicted_slope(pair: (u8, u8)) -> f64 {
    -1.0 - pair.0 as f64 - pair.1 as f64 / 2.0
}

/// Sup-norm errors over the slice nodes that fall inside the reference table.
pub fn error_norms(slice: &PhysicalSlice, blasius: &BlasiusProfile) -> Result<NormRow> {
    if slice.is_empty() || slice.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::RangeMismatch { reason: "slice has no finite y-grid".into() });
    }
    let y_top = blasius.z_max * (2.0 * (slice.x + 1.0)).sqrt();
    let idx: Vec<usize> = (0..slice.len()).filter(|&k| slice.y[k] <= y_top).collect();
    if idx.len() < 2 {
        return Err(Error::RangeMismatch { reason: format!("reference covers y <= {y_top:.3}, slice starts above") });
    }
    let mut row = NormRow { x: slice.x, norm_00: 0.0, norm_01: 0.0, norm_02: 0.0, norm_10: 0.0 };
    for k in idx {
        let r = reference_at(blasius, slice.x, slice.y[k]);
        row.norm_00 = row.norm_00.max((slice.u[k] - r.u).abs());
        row.norm_01 = row.norm_01.max((slice.u_y[k] - r.u_y).abs());
        row.norm_02 = row.norm_02.max((slice.u_yy[k] - r.u_yy).abs());
        row.norm_10 = row.norm_10.max((slice.u_x[k] - r.u_x).abs());
    }
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub stations: usize,
}

/// Minimum stations inside a fit window.
pub const MIN_STATIONS: usize = 6;

/// Ordinary least squares of `ln y` on `t` with a Student-t half-width.
pub fn fit_line(t: &[f64], y: &[f64]) -> Result<DecayFit> {
    let n = t.len();
    if n < 3 {
        return Err(Error::TooFewStations { need: 3, got: n });
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (a, b, se, r2) = lsq::line(t, &ly).ok_or_else(|| Error::invalid("stations", "degenerate abscissae"))?;
    let dof = (n - 2) as f64;
    let tq = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    let residual = (t.iter().zip(&ly).map(|(x, v)| (v - a - b * x).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(DecayFit { slope: b, half_width: tq * se, intercept: a, r2, residual, stations: n })
}

/// Norms closer than this factor to the discretization floor are rejected.
pub const FLOOR_FACTOR: f64 = 10.0;

/// Log-log slope of a norm column against `x + 1` over `window`.
pub fn fit_decay(rows: &[NormRow], window: (f64, f64), pair: (u8, u8)) -> Result<DecayFit> {
    fit_decay_above(rows, None, window, pair)
}

/// As [`fit_decay`], also rejecting stations whose norm is within
/// [`FLOOR_FACTOR`] of the matching `floor` row.
pub fn fit_decay_above(rows: &[NormRow], floor: Option<&[NormRow]>, window: (f64, f64), pair: (u8, u8)) -> Result<DecayFit> {
    let inside = |x: f64| x >= window.0 * (1.0 - 1e-12) && x <= window.1 * (1.0 + 1e-12);
    let sel: Vec<usize> = (0..rows.len()).filter(|&k| inside(rows[k].x)).collect();
    if sel.len() < MIN_STATIONS {
        return Err(Error::TooFewStations { need: MIN_STATIONS, got: sel.len() });
    }
    let t: Vec<f64> = sel.iter().map(|&k| (rows[k].x + 1.0).ln()).collect();
    let y: Vec<f64> = sel.iter().map(|&k| rows[k].get(pair)).collect();
    let eps_floor = 100.0 * f64::EPSILON;
    if let Some(v) = y.iter().find(|&&v| !(v > eps_floor)) {
        return Err(Error::NoisyFloor { reason: format!("norm {v:.3e} is below 100 machine epsilon") });
    }
    if let Some(fl) = floor {
        for &k in &sel {
            let f = fl.get(k).map(|r| r.get(pair)).unwrap_or(0.0);
            if rows[k].get(pair) <= FLOOR_FACTOR * f {
                return Err(Error::NoisyFloor {
                    reason: format!("norm {:.3e} at x = {:.3} is within {FLOOR_FACTOR}x of the floor {f:.3e}", rows[k].get(pair), rows[k].x),
                });
            }
        }
    }
    let fit = fit_line(&t, &y)?;
    check_floor(&t, &y, &fit)?;
    Ok(fit)
}

/// Rejects fits that bend over the window (a floor or transient) or scatter.
fn check_floor(t: &[f64], y: &[f64], fit: &DecayFit) -> Result<()> {
    if !(fit.r2 >= 0.98) {
        return Err(Error::NoisyFloor { reason: format!("log-log fit has r^2 = {:.4}", fit.r2) });
    }
    let t0 = t.iter().sum::<f64>() / t.len() as f64;
    let rows: Vec<Vec<f64>> = t.iter().map(|&x| vec![1.0, x - t0, (x - t0).powi(2)]).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    if let Some((c, _)) = lsq::fit(&rows, &ly) {
        let span = t.iter().cloned().fold(f64::MIN, f64::max) - t.iter().cloned().fold(f64::MAX, f64::min);
        // change of the local slope across the window, relative to the slope itself
        let bend = (2.0 * c[2] * span).abs();
        if bend > 0.25 * c[1].abs() {
            return Err(Error::NoisyFloor { reason: format!("local slope changes by {bend:.3} across the window") });
        }
    }
    Ok(())
}
