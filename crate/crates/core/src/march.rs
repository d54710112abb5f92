//! Semi-implicit marching of `omega_xi = sqrt(omega) omega_psipsi + psi omega_psi / 2`.
//!
//! Each step freezes the diffusion coefficient `sqrt(omega)` (Picard lag) and
//! solves one tridiagonal system. The discrete operator is shifted by its own
//! residual on `omega_bar`, so the Blasius state is an exact fixed point of the
//! scheme; the shift is `O(h^2)` and vanishes under refinement.
//!
//! Advection is centred unless the row loses its M-matrix sign pattern, which
//! happens when `sqrt(omega) < psi h_+ / 4`; those rows switch to the forward
//! (upwind) difference.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::mesh::{d2, OmegaField, PsiGrid};
use crate::similarity::SelfSimilarProfile;
use crate::tridiag;

/// Largest step the accuracy policy allows.
pub const DXI_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardFlags {
    pub comparison: bool,
    pub wall_slope: bool,
    pub concavity: bool,
    /// Abort the march on the first failed guard.
    pub fatal: bool,
}

impl Default for GuardFlags {
    fn default() -> Self {
        Self { comparison: true, wall_slope: true, concavity: false, fatal: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarchConfig {
    pub d_shift: f64,
    pub xi_end: f64,
    pub dxi: f64,
    pub scheme: Scheme,
    pub guards: GuardFlags,
    /// One extra Picard pass is taken when the lagged residual exceeds this.
    pub picard_tol: f64,
    /// Backward Euler steps used to start Crank-Nicolson.
    pub rannacher_steps: usize,
    pub envelope_slack: f64,
    /// Concavity slack relative to `max |sqrt(omega) omega_psipsi|`.
    pub concavity_tol: f64,
}

impl MarchConfig {
    pub fn new(d_shift: f64, xi_end: f64, dxi: f64) -> Self {
        Self {
            d_shift,
            xi_end,
            dxi,
            scheme: Scheme::CrankNicolson,
            guards: GuardFlags::default(),
            picard_tol: 1e-6,
            rannacher_steps: 2,
            envelope_slack: 1e-3,
            concavity_tol: 1e-6,
        }
    }

    pub fn xi_start(&self) -> f64 {
        self.d_shift.ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_shift >= 1.0) {
            return Err(Error::invalid("d_shift", "must be >= 1"));
        }
        if !(self.dxi > 0.0 && self.dxi <= DXI_MAX) {
            return Err(Error::invalid("dxi", format!("must lie in (0, {DXI_MAX}]")));
        }
        if !(self.xi_end > self.xi_start()) {
            return Err(Error::invalid("xi_end", "must exceed ln(d_shift)"));
        }
        if !(self.picard_tol > 0.0 && self.envelope_slack >= 0.0 && self.concavity_tol >= 0.0) {
            return Err(Error::invalid("guards", "tolerances must be nonnegative"));
        }
        Ok(())
    }
}

/// Structural monitors after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuardRecord {
    pub xi: f64,
    pub k1: f64,
    pub k2: f64,
    pub wall_slope: f64,
    pub max_p: f64,
    #[serde(skip)]
    pub ok: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<OmegaField>,
    pub guard_log: Vec<GuardRecord>,
    pub steps: usize,
}

impl Trajectory {
    pub fn xis(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.xi).collect()
    }
}

/// A march stopped by a step error or a fatal guard; completed snapshots are kept.
#[derive(Debug, ThisError)]
#[error("march stopped after {} snapshot(s): {error}", partial.snapshots.len())]
pub struct PartialTrajectory {
    pub error: Error,
    pub partial: Trajectory,
}

/// Envelope `k1 omega_bar <= omega <= k2 omega_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonCheck {
    pub k1: f64,
    pub k2: f64,
    pub pass: bool,
}

/// Observed `omega / omega_bar` range over the nodes `psi > 0`, with the wall
/// entry taken as the slope ratio `omega_psi(0) / omega_bar_psi(0)`.
pub fn observed_envelope(field: &OmegaField, ss: &SelfSimilarProfile) -> Envelope {
    let w = &field.values;
    let n = w.len();
    let slope = |v: &[f64]| d1_at(v, &field.grid, 0);
    let mut k1 = slope(w) / slope(&ss.wbar);
    let mut k2 = k1;
    for j in 1..n {
        let r = w[j] / ss.wbar[j];
        k1 = k1.min(r);
        k2 = k2.max(r);
    }
    Envelope { k1, k2 }
}

/// Comparison-principle check against a reference envelope widened by `slack`.
pub fn check_comparison(field: &OmegaField, ss: &SelfSimilarProfile, reference: Envelope, slack: f64) -> ComparisonCheck {
    let obs = observed_envelope(field, ss);
    let nonneg = field.values.iter().all(|&v| v >= -slack);
    let pass = nonneg && obs.k1 >= reference.k1 - slack && obs.k2 <= reference.k2 + slack;
    ComparisonCheck { k1: obs.k1, k2: obs.k2, pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityCheck {
    pub max_p: f64,
    pub scale: f64,
    pub pass: bool,
}

/// `max p` over interior nodes with `p = sqrt(omega) omega_psipsi`; passes when
/// `max p <= tol * max |p|`.
///
/// The node next to `psi_max` is skipped: its stencil reaches the imposed
/// value `omega = 1`, which sits slightly above any profile that has not
/// fully saturated there.
pub fn check_concavity(field: &OmegaField, tol: f64) -> ConcavityCheck {
    let w = &field.values;
    let dd = d2(w, &field.grid);
    let n = w.len();
    let (mut max_p, mut scale) = (f64::NEG_INFINITY, 0.0f64);
    for j in 1..n - 2 {
        let p = w[j].max(0.0).sqrt() * dd[j];
        max_p = max_p.max(p);
        scale = scale.max(p.abs());
    }
    ConcavityCheck { max_p, scale, pass: max_p <= tol * scale }
}

/// One-sided `omega_psi(0)`.
pub fn wall_slope(field: &OmegaField) -> f64 {
    d1_at(&field.values, &field.grid, 0)
}

fn d1_at(v: &[f64], grid: &PsiGrid, i: usize) -> f64 {
    grid.d1_stencil(i).apply(v)
}

/// Row of the discrete `a D2 + (psi/2) D1` at interior node `j`, as weights on
/// `(j-1, j, j+1)`.
fn row(grid: &PsiGrid, j: usize, a: f64, upwind: bool) -> [f64; 3] {
    let s2 = grid.d2_stencil(j);
    let b = 0.5 * grid.nodes()[j];
    let mut r = [a * s2.w[0], a * s2.w[1], a * s2.w[2]];
    if upwind {
        let h = grid.spacing(j);
        r[1] -= b / h;
        r[2] += b / h;
    } else {
        let s1 = grid.d1_stencil(j);
        for k in 0..3 {
            r[k] += b * s1.w[k];
        }
    }
    r
}

fn needs_upwind(grid: &PsiGrid, j: usize, a: f64) -> bool {
    a < 0.25 * grid.nodes()[j] * grid.spacing(j)
}

/// Marching engine bound to one grid and its self-similar profile.
#[derive(Debug, Clone)]
pub struct Marcher {
    grid: Arc<PsiGrid>,
    wbar: Vec<f64>,
    sqrt_wbar: Vec<f64>,
    balanced: bool,
}

impl Marcher {
    pub fn new(ss: &SelfSimilarProfile) -> Self {
        Self {
            grid: ss.grid.clone(),
            wbar: ss.wbar.clone(),
            sqrt_wbar: ss.wbar.iter().map(|w| w.sqrt()).collect(),
            balanced: true,
        }
    }

    /// Drops the steady-state residual shift (plain consistent scheme).
    pub fn unbalanced(mut self) -> Self {
        self.balanced = false;
        self
    }

    pub fn grid(&self) -> &Arc<PsiGrid> {
        &self.grid
    }

    fn check_field(&self, field: &OmegaField) -> Result<()> {
        if !(Arc::ptr_eq(&field.grid, &self.grid) || field.grid.nodes() == self.grid.nodes()) {
            return Err(Error::invalid("field", "grid differs from the self-similar profile grid"));
        }
        if !field.boundary_ok() {
            return Err(Error::invalid("field", "boundary values must be omega(0) = 0 and omega(psi_max) = 1"));
        }
        Ok(())
    }

    /// Right-hand side of the marching equation, `sqrt(omega) D2 omega + psi/2 D1 omega`
    /// minus the balance shift, at every node (ends are zero).
    pub fn rate(&self, omega: &[f64]) -> Vec<f64> {
        let n = omega.len();
        let mut out = vec![0.0; n];
        for j in 1..n - 1 {
            let a = omega[j].max(0.0).sqrt();
            let up = needs_upwind(&self.grid, j, a);
            let r = row(&self.grid, j, a, up);
            out[j] = r[0] * omega[j - 1] + r[1] * omega[j] + r[2] * omega[j + 1] - self.shift(j, up);
        }
        out
    }

    fn shift(&self, j: usize, upwind: bool) -> f64 {
        if !self.balanced {
            return 0.0;
        }
        let r = row(&self.grid, j, self.sqrt_wbar[j], upwind);
        r[0] * self.wbar[j - 1] + r[1] * self.wbar[j] + r[2] * self.wbar[j + 1]
    }

    /// Solves `omega/dxi - theta L_a omega = omega_n/dxi + (1-theta) L_a omega_n - S`.
    fn theta_solve(&self, omega_n: &[f64], a: &[f64], dxi: f64, theta: f64) -> Result<Vec<f64>> {
        let n = omega_n.len();
        let m = n - 2;
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let inv = 1.0 / dxi;
        for j in 1..n - 1 {
            let i = j - 1;
            let upw = needs_upwind(&self.grid, j, a[j]);
            let r = row(&self.grid, j, a[j], upw);
            lo[i] = -theta * r[0];
            di[i] = inv - theta * r[1];
            up[i] = -theta * r[2];
            let explicit = r[0] * omega_n[j - 1] + r[1] * omega_n[j] + r[2] * omega_n[j + 1];
            rhs[i] = inv * omega_n[j] + (1.0 - theta) * explicit - self.shift(j, upw);
        }
        // Dirichlet data: omega(0) = 0 contributes nothing, omega(psi_max) = 1
        rhs[m - 1] -= up[m - 1] * 1.0;
        debug_assert!(tridiag::is_diagonally_dominant(&lo, &di, &up) || theta < 1.0);
        tridiag::solve_in_place(&lo, &di, &up, &mut rhs)?;
        let mut out = Vec::with_capacity(n);
        out.push(0.0);
        out.extend(rhs);
        out.push(1.0);
        Ok(out)
    }

    fn coefficient(omega: &[f64]) -> Vec<f64> {
        omega.iter().map(|w| w.max(0.0).sqrt()).collect()
    }

    /// Max-norm residual of the fully implicit equation at `omega_new`.
    fn implicit_residual(&self, omega_n: &[f64], omega_new: &[f64], dxi: f64) -> f64 {
        let rate = self.rate(omega_new);
        (1..omega_n.len() - 1)
            .map(|j| ((omega_new[j] - omega_n[j]) / dxi - rate[j]).abs())
            .fold(0.0, f64::max)
    }

    fn backward_euler(&self, omega_n: &[f64], dxi: f64, picard_tol: f64) -> Result<Vec<f64>> {
        let first = self.theta_solve(omega_n, &Self::coefficient(omega_n), dxi, 1.0)?;
        if self.implicit_residual(omega_n, &first, dxi) <= picard_tol {
            return Ok(first);
        }
        self.theta_solve(omega_n, &Self::coefficient(&first), dxi, 1.0)
    }

    fn crank_nicolson(&self, omega_n: &[f64], dxi: f64) -> Result<Vec<f64>> {
        let pred = self.theta_solve(omega_n, &Self::coefficient(omega_n), dxi, 1.0)?;
        let mid: Vec<f64> = omega_n.iter().zip(&pred).map(|(a, b)| 0.5 * (a + b)).collect();
        self.theta_solve(omega_n, &Self::coefficient(&mid), dxi, 0.5)
    }

    /// Advances `field` by `dxi`.
    pub fn step(&self, field: &OmegaField, dxi: f64, scheme: Scheme) -> Result<OmegaField> {
        self.step_with(field, dxi, scheme, 1e-6)
    }

    pub fn step_with(&self, field: &OmegaField, dxi: f64, scheme: Scheme, picard_tol: f64) -> Result<OmegaField> {
        self.check_field(field)?;
        if !(dxi >= 0.0 && dxi <= DXI_MAX) {
            return Err(Error::invalid("dxi", format!("must lie in [0, {DXI_MAX}]")));
        }
        if dxi == 0.0 {
            return Ok(field.clone());
        }
        let values = match scheme {
            Scheme::BackwardEuler => self.backward_euler(&field.values, dxi, picard_tol)?,
            Scheme::CrankNicolson => self.crank_nicolson(&field.values, dxi)?,
        };
        Ok(OmegaField { grid: field.grid.clone(), values, xi: field.xi + dxi, d_shift: field.d_shift })
    }
}

fn guard_error(guard: &'static str, xi: f64, detail: String) -> Error {
    Error::GuardViolation { guard, xi, detail }
}

/// Marches `initial` to `config.xi_end`, recording snapshots at `output_xis`.
///
/// The step is shortened where needed so that every snapshot lands exactly on
/// its requested station.
pub fn march(
    initial: &OmegaField,
    ss: &SelfSimilarProfile,
    config: &MarchConfig,
    output_xis: &[f64],
) -> std::result::Result<Trajectory, PartialTrajectory> {
    let mut traj = Trajectory::default();
    let fail = |error: Error, traj: Trajectory| PartialTrajectory { error, partial: traj };
    if let Err(e) = config.validate() {
        return Err(fail(e, traj));
    }
    let xi0 = initial.xi;
    if (xi0 - config.xi_start()).abs() > 1e-12 || (initial.d_shift - config.d_shift).abs() > 1e-12 {
        return Err(fail(Error::invalid("initial", "field must start at xi = ln(d_shift) with the same d"), traj));
    }
    if output_xis.is_empty() {
        return Err(fail(Error::invalid("output_xis", "need at least one station"), traj));
    }
    let tol = 1e-12 * config.xi_end.abs().max(1.0);
    if output_xis.windows(2).any(|w| !(w[1] > w[0]))
        || !(output_xis[0] > xi0 + tol)
        || output_xis[output_xis.len() - 1] > config.xi_end + tol
    {
        return Err(fail(Error::invalid("output_xis", "must increase strictly inside (xi0, xi_end]"), traj));
    }
    let marcher = Marcher::new(ss);
    if let Err(e) = marcher.check_field(initial) {
        return Err(fail(e, traj));
    }

    let envelope = observed_envelope(initial, ss);
    let guards = config.guards;
    if guards.concavity {
        let c = check_concavity(initial, config.concavity_tol);
        if !c.pass && guards.fatal {
            let detail = format!("initial data not concave: max p = {:.3e}", c.max_p);
            return Err(fail(guard_error("concavity", xi0, detail), traj));
        }
    }

    let mut field = initial.clone();
    let mut next_out = 0;
    let mut step_index = 0usize;
    while next_out < output_xis.len() {
        let target = output_xis[next_out];
        let remaining = target - field.xi;
        let (dxi, lands) = if remaining <= config.dxi * (1.0 + 1e-9) { (remaining, true) } else { (config.dxi, false) };
        let scheme = if step_index < config.rannacher_steps { Scheme::BackwardEuler } else { config.scheme };
        field = match marcher.step_with(&field, dxi, scheme, config.picard_tol) {
            Ok(f) => f,
            Err(e) => return Err(fail(e, traj)),
        };
        if lands {
            field.xi = target;
        }
        step_index += 1;
        traj.steps = step_index;

        let cmp = check_comparison(&field, ss, envelope, config.envelope_slack);
        let slope = wall_slope(&field);
        let conc = check_concavity(&field, config.concavity_tol);
        let mut violation = None;
        if guards.comparison && !cmp.pass {
            violation = Some(("comparison", format!("k1 = {:.6}, k2 = {:.6} outside [{:.6}, {:.6}]", cmp.k1, cmp.k2, envelope.k1, envelope.k2)));
        } else if guards.wall_slope && !(slope > 0.0) {
            violation = Some(("wall_slope", format!("omega_psi(0) = {slope:.3e}")));
        } else if guards.concavity && !conc.pass {
            violation = Some(("concavity", format!("max p = {:.3e} (scale {:.3e})", conc.max_p, conc.scale)));
        }
        traj.guard_log.push(GuardRecord {
            xi: field.xi,
            k1: cmp.k1,
            k2: cmp.k2,
            wall_slope: slope,
            max_p: conc.max_p,
            ok: violation.is_none(),
        });
        if let Some((guard, detail)) = violation {
            if guards.fatal {
                return Err(fail(guard_error(guard, field.xi, detail), traj));
            }
        }
        if lands {
            traj.snapshots.push(field.clone());
            next_out += 1;
        }
    }
    Ok(traj)
}

/// Evenly spaced stations `xi0 + k (xi_end - xi0) / count`, `k = 1..=count`.
pub fn uniform_stations(xi0: f64, xi_end: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| xi0 + (xi_end - xi0) * k as f64 / count as f64).collect()
}
