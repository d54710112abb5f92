use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

use super::grid::PsiGrid;
use super::ops::cumulative_trapezoid;

/// Solution `omega = u^2` on a psi-grid at one marching station.
#[derive(Debug, Clone)]
pub struct OmegaField {
    pub grid: Arc<PsiGrid>,
    pub values: Vec<f64>,
    /// Marching variable `xi = ln(x + d)`.
    pub xi: f64,
    /// Shift `d` of the modified von Mises coordinates.
    pub d_shift: f64,
}

impl OmegaField {
    pub fn new(grid: Arc<PsiGrid>, values: Vec<f64>, xi: f64, d_shift: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length differs from grid"));
        }
        if !(d_shift > 0.0) {
            return Err(Error::invalid("d_shift", "must be positive"));
        }
        Ok(Self { grid, values, xi, d_shift })
    }

    /// Streamwise position `x = e^xi - d`.
    pub fn x(&self) -> f64 {
        self.xi.exp() - self.d_shift
    }

    /// Wall and far-field Dirichlet data hold exactly.
    pub fn boundary_ok(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 1.0
    }
}

/// Tabulated physical inflow profile `u_0(y)`.
#[derive(Debug, Clone)]
pub struct InitialProfile {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// Gaussian decay rate of `|u_0 - 1|`, kept for reporting.
    pub decay_eps: f64,
}

/// Allowed gap `1 - u_0` at the last sample.
pub const INFLOW_TAIL_TOL: f64 = 1e-3;

impl InitialProfile {
    pub fn new(y: Vec<f64>, u: Vec<f64>, decay_eps: f64) -> Result<Self> {
        if y.len() < 3 || y.len() != u.len() {
            return Err(Error::invalid("u0", "need at least 3 matching (y, u0) samples"));
        }
        if y[0] != 0.0 || u[0] != 0.0 {
            return Err(Error::invalid("u0", "profile must start at y = 0 with u0 = 0"));
        }
        if y.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("y", "samples must be strictly increasing"));
        }
        if let Some(k) = (1..u.len()).find(|&k| !(u[k] > 0.0)) {
            return Err(Error::NonMonotoneStream { y: y[k] });
        }
        let last = u[u.len() - 1];
        if (1.0 - last).abs() > INFLOW_TAIL_TOL {
            return Err(Error::invalid("u0", format!("last sample {last} is not within tail tolerance of 1")));
        }
        Ok(Self { y, u, decay_eps })
    }

    /// Samples `u_0` on a uniform y-grid.
    pub fn from_fn(y_max: f64, samples: usize, decay_eps: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let y: Vec<f64> = (0..=samples).map(|k| y_max * k as f64 / samples as f64).collect();
        let u = y.iter().map(|&v| f(v)).collect();
        Self::new(y, u, decay_eps)
    }

    /// Stream coordinate `psi(y) = int_0^y u_0 / sqrt(d)` at the samples.
    pub fn stream_coordinate(&self, d_shift: f64) -> Result<Vec<f64>> {
        let scale = 1.0 / d_shift.sqrt();
        let integrand: Vec<f64> = self.u.iter().map(|u| u * scale).collect();
        let psi = cumulative_trapezoid(&self.y, &integrand);
        if let Some(k) = (1..psi.len()).find(|&k| !(psi[k] > psi[k - 1])) {
            return Err(Error::NonMonotoneStream { y: self.y[k] });
        }
        Ok(psi)
    }

    /// Monotone interpolant of `u_0`.
    pub fn interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.y.clone(), self.u.clone())
    }
}

/// Maps a physical inflow profile to `omega_0(psi)` at `xi = ln d`.
///
/// The stream coordinate is scaled by `sqrt(d)`, matching the modified von
/// Mises map evaluated at `x = 0`. Beyond the last sample `omega_0 = 1`.
pub fn ingest_initial(profile: &InitialProfile, d_shift: f64, grid: Arc<PsiGrid>) -> Result<OmegaField> {
    if !(d_shift > 0.0) {
        return Err(Error::invalid("d_shift", "must be positive"));
    }
    let psi = profile.stream_coordinate(d_shift)?;
    let w: Vec<f64> = profile.u.iter().map(|u| u * u).collect();
    let psi_last = psi[psi.len() - 1];
    let interp = MonotoneCubic::new(psi, w);
    let n = grid.len();
    let mut values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&p| if p >= psi_last { 1.0 } else { interp.eval(p).clamp(0.0, 1.0) })
        .collect();
    values[0] = 0.0;
    values[n - 1] = 1.0;
    OmegaField::new(grid, values, d_shift.ln(), d_shift)
}
