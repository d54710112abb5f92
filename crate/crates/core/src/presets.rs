//! Named inflow profiles used by the experiments and test batteries.
//!
//! Each preset knows its stream function in closed form, so the exact
//! `omega_0(psi)` is available for checking the ingestion step. The shifted
//! Blasius family `u = f'(y / sqrt(2(x + s)))` is also an exact solution for
//! all `x`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};
use crate::mesh::InitialProfile;

/// Samples per unit length of `y` when tabulating a preset.
pub const SAMPLES_PER_UNIT: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inflow {
    /// `f'(y / sqrt(2 s))`, the shifted Blasius profile.
    Shifted { s: f64 },
    Tanh,
    Erf,
    /// `sin(pi y / (2 width))` up to `y = width`, then 1.
    Sine { width: f64 },
}

impl Inflow {
    /// The concave battery used for the structural-guard checks.
    pub fn battery() -> Vec<Inflow> {
        vec![
            Inflow::Shifted { s: 0.5 },
            Inflow::Shifted { s: 1.2 },
            Inflow::Shifted { s: 2.0 },
            Inflow::Shifted { s: 4.0 },
            Inflow::Tanh,
            Inflow::Erf,
            Inflow::Sine { width: 3.0 },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Inflow::Shifted { s } => format!("shifted_s{s}"),
            Inflow::Tanh => "tanh".into(),
            Inflow::Erf => "erf".into(),
            Inflow::Sine { width } => format!("sine_w{width}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Inflow::Shifted { s } if !(s > 0.0) => Err(Error::invalid("s", "must be positive")),
            Inflow::Sine { width } if !(width > 0.0) => Err(Error::invalid("width", "must be positive")),
            _ => Ok(()),
        }
    }

    /// `u_0(y)`.
    pub fn u(&self, blasius: &BlasiusProfile, y: f64) -> f64 {
        match *self {
            Inflow::Shifted { s } => blasius.eval(y / (2.0 * s).sqrt()).fp.min(1.0),
            Inflow::Tanh => y.tanh(),
            Inflow::Erf => erf(y),
            Inflow::Sine { width } => {
                if y < width {
                    (0.5 * PI * y / width).sin()
                } else {
                    1.0
                }
            }
        }
    }

    /// `int_0^y u_0` in closed form.
    pub fn stream(&self, blasius: &BlasiusProfile, y: f64) -> f64 {
        match *self {
            Inflow::Shifted { s } => {
                let c = (2.0 * s).sqrt();
                c * blasius.eval(y / c).f
            }
            Inflow::Tanh => y.cosh().ln(),
            Inflow::Erf => y * erf(y) + ((-y * y).exp() - 1.0) / PI.sqrt(),
            Inflow::Sine { width } => {
                let k = 2.0 * width / PI;
                if y < width {
                    k * (1.0 - (0.5 * PI * y / width).cos())
                } else {
                    k + (y - width)
                }
            }
        }
    }

    /// Height where `1 - u_0` reaches round-off (inside the Blasius table for shifted profiles).
    pub fn y_extent(&self, blasius: &BlasiusProfile) -> f64 {
        match *self {
            Inflow::Shifted { s } => (2.0 * s).sqrt() * 0.9 * blasius.z_max,
            Inflow::Tanh => 20.0,
            Inflow::Erf => 6.0,
            Inflow::Sine { width } => width + 1.0,
        }
    }

    pub fn profile(&self, blasius: &BlasiusProfile) -> Result<InitialProfile> {
        self.validate()?;
        let y_max = self.y_extent(blasius);
        let samples = (y_max * SAMPLES_PER_UNIT).ceil() as usize;
        let eps = match self {
            Inflow::Shifted { s } => 1.0 / (4.0 * s),
            Inflow::Tanh => 0.0,
            Inflow::Erf => 1.0,
            Inflow::Sine { .. } => f64::INFINITY,
        };
        InitialProfile::from_fn(y_max, samples, eps, |y| self.u(blasius, y))
    }

    /// Exact `omega_0(psi)` at `xi = ln d`, by bisection on the closed-form stream function.
    pub fn exact_initial_omega(&self, blasius: &BlasiusProfile, d_shift: f64, psi: f64) -> f64 {
        let target = psi * d_shift.sqrt();
        let y_top = self.y_extent(blasius);
        if target >= self.stream(blasius, y_top) {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, y_top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.stream(blasius, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * y_top {
                break;
            }
        }
        self.u(blasius, 0.5 * (lo + hi)).powi(2)
    }

    /// Exact `omega(xi, psi)` for the shifted family; `None` otherwise.
    pub fn exact_omega(&self, blasius: &BlasiusProfile, d_shift: f64, xi: f64, psi: f64) -> Option<f64> {
        match *self {
            Inflow::Shifted { s } => {
                let x = xi.exp() - d_shift;
                let scaled = psi * ((x + d_shift) / (x + s)).sqrt();
                let f = scaled / SQRT_2;
                let n = blasius.len() - 1;
                if f >= blasius.f[n] {
                    return Some(1.0);
                }
                let z = blasius.z_for_f(f).ok()?;
                Some(blasius.eval(z).fp.powi(2))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blasius::solve_blasius;

    #[test]
    fn streams_are_antiderivatives() {
        let b = solve_blasius(10.0, 1e-3, 1e-10).unwrap();
        for p in Inflow::battery() {
            let h = 1e-5;
            for y in [0.3, 1.1, 2.5] {
                let num = (p.stream(&b, y + h) - p.stream(&b, y - h)) / (2.0 * h);
                assert!((num - p.u(&b, y)).abs() < 1e-6, "{} at {y}", p.name());
            }
            assert!(p.profile(&b).is_ok(), "{}", p.name());
        }
    }

    #[test]
    fn shifted_family_starts_from_scaled_blasius() {
        let b = solve_blasius(10.0, 1e-3, 1e-10).unwrap();
        let p = Inflow::Shifted { s: 4.0 };
        for psi in [0.2, 1.0, 3.0] {
            let a = p.exact_initial_omega(&b, 1.0, psi);
            let c = p.exact_omega(&b, 1.0, 0.0, psi).unwrap();
            assert!((a - c).abs() < 1e-9, "{a} {c}");
        }
    }
}
