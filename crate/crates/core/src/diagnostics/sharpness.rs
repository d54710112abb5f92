//! Closed-form norms of `u_bar^s - u_bar` for the shifted Blasius family.

use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};

use super::norms::NormRow;

/// Samples per station for the dense sup-norm.
pub const SAMPLES: usize = 4000;

/// `u = f'(y / sqrt(2 (x + c)))` and derivatives at one point.
fn shifted(blasius: &BlasiusProfile, c: f64, x: f64, y: f64) -> [f64; 4] {
    let l = (2.0 * (x + c)).sqrt();
    let z = y / l;
    let p = blasius.eval(z);
    [p.fp, p.fpp / l, p.fppp() / (l * l), -p.fpp * z / (2.0 * (x + c))]
}

/// `|| d_x^i d_y^j (u_bar^s - u_bar^d) ||_inf` at each station by dense sampling.
pub fn sharpness_family(blasius: &BlasiusProfile, s: f64, d: f64, stations: &[f64]) -> Result<Vec<NormRow>> {
    if !(s > 0.0 && d > 0.0) {
        return Err(Error::invalid("s", "shifts must be positive"));
    }
    stations
        .iter()
        .map(|&x| {
            if !(x > -s.min(d)) {
                return Err(Error::invalid("stations", format!("x = {x} below -min(s, d)")));
            }
            let y_top = blasius.z_max * (2.0 * (x + s.max(d))).sqrt();
            let mut row = NormRow { x, norm_00: 0.0, norm_01: 0.0, norm_02: 0.0, norm_10: 0.0 };
            for k in 0..=SAMPLES {
                let y = y_top * k as f64 / SAMPLES as f64;
                let a = shifted(blasius, s, x, y);
                let b = shifted(blasius, d, x, y);
                row.norm_00 = row.norm_00.max((a[0] - b[0]).abs());
                row.norm_01 = row.norm_01.max((a[1] - b[1]).abs());
                row.norm_02 = row.norm_02.max((a[2] - b[2]).abs());
                row.norm_10 = row.norm_10.max((a[3] - b[3]).abs());
            }
            Ok(row)
        })
        .collect()
}
