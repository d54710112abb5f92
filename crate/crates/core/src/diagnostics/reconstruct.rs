//! Physical fields from `omega(xi, psi)`.
//!
//! With `X = x + d = e^xi` and `I(psi) = int_0^psi omega^-1/2 (1 - omega_xi / omega)`:
//!
//! ```text
//! y   = sqrt(X) int_0^psi omega^-1/2
//! u_y = omega_psi / (2 sqrt X)        u_yy = sqrt(omega) omega_psipsi / (2 X)
//! u_x = (omega_xi / (2 sqrt(omega)) - omega_psi I / 4) / X
//! v   = (sqrt(omega) I - psi) / (2 sqrt X)
//! ```
//!
//! Cell integrals of `omega^-1/2` use four-point Gauss-Legendre on the cubic
//! Hermite interpolant of `omega`; the wall cell is mapped by `psi = h t^2`,
//! which removes the `s^-1/2` singularity.

use serde::Serialize;

use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};
use crate::interp::hermite;
use crate::march::Marcher;
use crate::mesh::{d1, d2, OmegaField};
use crate::similarity::SelfSimilarProfile;

#[derive(Debug, Clone, Serialize)]
pub struct PhysicalSlice {
    pub x: f64,
    pub d_shift: f64,
    pub psi: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub u_y: Vec<f64>,
    pub u_yy: Vec<f64>,
    pub u_x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhysicalSlice {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

// Gauss-Legendre nodes on [0, 1] with weights.
const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Reconstructs the physical slice; `omega_xi` comes from the discrete equation.
pub fn reconstruct(field: &OmegaField, ss: &SelfSimilarProfile) -> Result<PhysicalSlice> {
    let w = &field.values;
    let n = w.len();
    let grid = &field.grid;
    let psi = grid.nodes();
    let wp = d1(w, grid);
    if !(wp[0] > 0.0) {
        return Err(Error::DegenerateWall { slope: wp[0] });
    }
    if let Some(j) = (1..n).find(|&j| !(w[j] > 0.0)) {
        return Err(Error::DegenerateWall { slope: w[j] });
    }
    let wpp = d2(w, grid);
    let w_xi = Marcher::new(ss).rate(w);
    let big_x = field.xi.exp();
    let sx = big_x.sqrt();
    let sq: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();

    // 1 - omega_xi / omega, with its wall limit extrapolated from the first two nodes
    let mut g: Vec<f64> = (0..n).map(|j| if j == 0 { 0.0 } else { 1.0 - w_xi[j] / w[j] }).collect();
    g[0] = g[1] - (g[2] - g[1]) * psi[1] / (psi[2] - psi[1]);

    let mut y = vec![0.0; n];
    let mut big_i = vec![0.0; n];
    for k in 0..n - 1 {
        let (a, b) = (psi[k], psi[k + 1]);
        let h = b - a;
        let (mut cell, mut cell_g) = (0.0, 0.0);
        for (t, wq) in GAUSS4 {
            // wall cell: psi = h t^2, d psi = 2 h t dt
            let (p, jac) = if k == 0 { (h * t * t, 2.0 * h * t) } else { (a + h * t, h) };
            let wv = hermite(a, b, w[k], w[k + 1], wp[k], wp[k + 1], p);
            if !(wv > 0.0) {
                return Err(Error::DegenerateWall { slope: wv });
            }
            let gv = g[k] + (g[k + 1] - g[k]) * (p - a) / h;
            let dq = wq * jac / wv.sqrt();
            cell += dq;
            cell_g += dq * gv;
        }
        y[k + 1] = y[k] + sx * cell;
        big_i[k + 1] = big_i[k] + cell_g;
    }
    let u_y: Vec<f64> = wp.iter().map(|p| p / (2.0 * sx)).collect();
    let mut u_yy: Vec<f64> = (0..n).map(|j| sq[j] * wpp[j] / (2.0 * big_x)).collect();
    u_yy[0] = 0.0;
    let mut u_x = vec![0.0; n];
    let mut v = vec![0.0; n];
    for j in 1..n {
        u_x[j] = (w_xi[j] / (2.0 * sq[j]) - 0.25 * wp[j] * big_i[j]) / big_x;
        v[j] = (sq[j] * big_i[j] - psi[j]) / (2.0 * sx);
    }
    Ok(PhysicalSlice { x: field.x(), d_shift: field.d_shift, psi: psi.to_vec(), y, u: sq, u_y, u_yy, u_x, v })
}

/// Blasius reference `u_bar = f'(z)`, `z = y / sqrt(2(x+1))`, and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub u: f64,
    pub u_y: f64,
    pub u_yy: f64,
    pub u_x: f64,
    pub v: f64,
}

pub fn reference_at(blasius: &BlasiusProfile, x: f64, y: f64) -> ReferencePoint {
    let l = (2.0 * (x + 1.0)).sqrt();
    let z = y / l;
    let p = blasius.eval(z);
    ReferencePoint {
        u: p.fp,
        u_y: p.fpp / l,
        u_yy: p.fppp() / (l * l),
        u_x: -p.fpp * z / (2.0 * (x + 1.0)),
        v: (z * p.fp - p.f) / l,
    }
}
