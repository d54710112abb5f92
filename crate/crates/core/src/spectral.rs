//! Linearized operator about the Blasius state and its principal eigenpair.
//!
//! The quadratic form is
//! `Q(v) = int rho v'^2 - int omega_bar'' / (2 sqrt(omega_bar)) A v^2`
//! against the mass `int A v^2`. The reaction coefficient is assembled through
//! the identity `omega_bar'' = -psi omega_bar' / (2 sqrt(omega_bar))`, giving
//! `psi omega_bar' A / (4 omega_bar)`, which stays finite on every dual cell.
//!
//! Unknowns live on nodes `1..J-1`; `v = 0` is imposed at both ends. A
//! zero-flux outer condition admits spurious modes that are flat in the tail,
//! where `A` has finite mass on the truncated interval but `rho v'^2` does not
//! see them.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::PsiGrid;
use crate::similarity::SelfSimilarProfile;
use crate::tridiag;

pub const SHIFT: f64 = 0.5;
pub const MAX_ITERS: usize = 500;

/// Symmetric tridiagonal stiffness and lumped mass on nodes `1..J-1`.
#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub grid: Arc<PsiGrid>,
    /// Face conductances `rho(psi_{k+1/2}) / h_k`, one per cell.
    pub conductance: Vec<f64>,
    /// Reaction coefficient at every node (entry 0 unused).
    pub reaction: Vec<f64>,
    pub diag: Vec<f64>,
    /// `off[k]` couples unknowns `k` and `k + 1`.
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

impl OperatorMatrices {
    /// Number of unknowns `J - 1`.
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Stiffness applied to a vector of unknowns.
    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply_stiffness(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    fn mass_form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mass.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
    }

    /// Bilinear stiffness form on full nodal vectors (end values ignored).
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.form(interior(v), interior(w))
    }

    /// Discrete `L v = T v / A` on the unknown nodes.
    pub fn apply_operator(&self, v: &[f64]) -> Vec<f64> {
        self.apply_stiffness(interior(v)).iter().zip(&self.mass).map(|(t, m)| t / m).collect()
    }

    fn shifted_solve(&self, shift: f64, rhs: &mut [f64]) -> Result<()> {
        let n = self.dim();
        let diag: Vec<f64> = (0..n).map(|i| self.diag[i] - shift * self.mass[i]).collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n - 1 {
            upper[i] = self.off[i];
            lower[i + 1] = self.off[i];
        }
        tridiag::solve_in_place(&lower, &diag, &upper, rhs)
    }
}

/// Assembles the operator from the self-similar profile.
pub fn assemble(profile: &SelfSimilarProfile) -> Result<OperatorMatrices> {
    let psi = profile.psi();
    let m = psi.len();
    let rho_face = profile.rho_at_midpoints();
    let mut reaction = vec![0.0; m];
    let mut a = vec![0.0; m];
    for j in 1..m {
        let s = profile.sqrt_wbar_regularized(j);
        reaction[j] = psi[j] * profile.wbar_p[j] * profile.a_weight[j] / (4.0 * s * s);
        a[j] = profile.a_weight[j];
    }
    assemble_from(profile.grid.clone(), &rho_face, &reaction, &a)
}

/// Assembles from raw coefficients: `rho` at cell midpoints, reaction and `A`
/// at nodes (index 0 unused).
pub fn assemble_from(grid: Arc<PsiGrid>, rho_face: &[f64], reaction: &[f64], a: &[f64]) -> Result<OperatorMatrices> {
    let m = grid.len();
    assert!(rho_face.len() == m - 1 && reaction.len() == m && a.len() == m);
    let conductance: Vec<f64> = (0..m - 1).map(|k| rho_face[k] / grid.spacing(k)).collect();
    let n = m - 2;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut mass = vec![0.0; n];
    for j in 1..m - 1 {
        let w = grid.dual_width(j);
        let i = j - 1;
        diag[i] = conductance[j - 1] + conductance[j] + reaction[j] * w;
        if j + 2 < m {
            off[i] = -conductance[j];
        }
        mass[i] = a[j] * w;
    }
    let bad = |v: &[f64]| v.iter().position(|x| !x.is_finite());
    if let Some(k) = bad(&conductance) {
        return Err(Error::BadProfile { what: "face weight", node: k });
    }
    if let Some(k) = bad(&diag) {
        return Err(Error::BadProfile { what: "stiffness", node: k + 1 });
    }
    if let Some(k) = mass.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::BadProfile { what: "mass", node: k + 1 });
    }
    Ok(OperatorMatrices { grid, conductance, reaction: reaction.to_vec(), diag, off, mass })
}

fn interior(v: &[f64]) -> &[f64] {
    &v[1..v.len() - 1]
}

fn nodal(x: Vec<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + 2);
    v.push(0.0);
    v.extend(x);
    v.push(0.0);
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Nodal eigenvector including both end nodes, mass-normalized and positive.
    #[serde(skip)]
    pub eigvec: Vec<f64>,
    pub rq: f64,
    pub iters: usize,
    pub refine_history: Vec<(usize, f64)>,
}

impl EigenResult {
    /// `|| L e - lambda e ||_M / || e ||_M` with `L = M^-1 K`.
    pub fn residual(&self, mats: &OperatorMatrices) -> f64 {
        eigen_residual(mats, self.lambda1, interior(&self.eigvec))
    }
}

fn eigen_residual(mats: &OperatorMatrices, lambda: f64, e: &[f64]) -> f64 {
    let ke = mats.apply_stiffness(e);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..e.len() {
        let me = mats.mass[i] * e[i];
        num += (ke[i] - lambda * me).powi(2) / mats.mass[i];
        den += me * e[i];
    }
    (num / den).sqrt()
}

fn inverse_iteration(mats: &OperatorMatrices, tol: f64, deflate: Option<&[f64]>) -> Result<(f64, Vec<f64>, usize)> {
    if !(tol >= 1e-12) {
        return Err(Error::invalid("tol", "must be >= 1e-12"));
    }
    let n = mats.dim();
    let psi = mats.grid.nodes();
    let mut x: Vec<f64> = (1..=n).map(|j| psi[j] * (-psi[j] * psi[j] / 8.0).exp() * (1.0 + 0.1 * psi[j])).collect();
    let project = |x: &mut Vec<f64>| {
        if let Some(e) = deflate {
            let c = mats.mass_form(e, x);
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi -= c * ei;
            }
        }
    };
    project(&mut x);
    let mut rq_prev = f64::NAN;
    for it in 1..=MAX_ITERS {
        let mut y: Vec<f64> = x.iter().zip(&mats.mass).map(|(a, m)| a * m).collect();
        mats.shifted_solve(SHIFT, &mut y)?;
        project(&mut y);
        let norm = mats.mass_form(&y, &y).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroVector);
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let rq = mats.form(&y, &y);
        x = y;
        if (rq - rq_prev).abs() < tol && eigen_residual(mats, rq, &x) < 10.0 * tol {
            return Ok((rq, x, it));
        }
        rq_prev = rq;
    }
    Err(Error::NoConvergence { what: "inverse iteration", iters: MAX_ITERS, last: rq_prev })
}

/// Shifted inverse iteration for the lowest eigenpair of `(K, M)`.
pub fn principal_eigen(mats: &OperatorMatrices, tol: f64) -> Result<EigenResult> {
    let (lambda, mut x, iters) = inverse_iteration(mats, tol, None)?;
    let sum: f64 = x.iter().sum();
    if sum < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let eigvec = nodal(x);
    let rq = rayleigh(mats, &eigvec)?;
    Ok(EigenResult { lambda1: lambda, eigvec, rq, iters, refine_history: vec![(mats.grid.cells(), lambda)] })
}

/// Second eigenpair by inverse iteration deflated against `principal`.
pub fn second_eigen(mats: &OperatorMatrices, principal: &EigenResult, tol: f64) -> Result<(f64, Vec<f64>)> {
    let (lambda, x, _) = inverse_iteration(mats, tol, Some(interior(&principal.eigvec)))?;
    Ok((lambda, nodal(x)))
}

/// Rayleigh quotient `Q(v) / int A v^2` for a nodal vector with `v[0] = 0`.
/// The value at `psi_max` is replaced by the boundary value 0.
pub fn rayleigh(mats: &OperatorMatrices, v: &[f64]) -> Result<f64> {
    if v.len() != mats.dim() + 2 {
        return Err(Error::invalid("v", format!("expected {} nodal values, got {}", mats.dim() + 2, v.len())));
    }
    if v[0] != 0.0 {
        return Err(Error::invalid("v", "must vanish at psi = 0"));
    }
    let x = interior(v);
    let den = mats.mass_form(x, x);
    if !(den > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(mats.form(x, x) / den)
}

/// `F(v) - 1`: nonnegative for admissible `v` when the coercivity estimate holds.
pub fn coercivity_gap(mats: &OperatorMatrices, v: &[f64]) -> Result<f64> {
    Ok(rayleigh(mats, v)? - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of `int (1+psi)^2 rho v^2 / omega_bar^2 <~ int rho v'^2`.
pub fn check_hardy(profile: &SelfSimilarProfile, v: &[f64]) -> Result<HardyRatio> {
    let psi = profile.psi();
    let m = psi.len();
    if v.len() != m {
        return Err(Error::invalid("v", format!("expected {m} nodal values, got {}", v.len())));
    }
    if v[0] != 0.0 {
        return Err(Error::invalid("v", "must vanish at psi = 0"));
    }
    if v[m - 5..].iter().any(|&x| x != 0.0) {
        return Err(Error::invalid("v", "must vanish on the last 5 nodes"));
    }
    let slope = profile.wall_slope();
    let mut integrand = vec![0.0; m];
    // v / omega_bar -> v'(0) / slope at the wall
    integrand[0] = (v[1] / psi[1] / slope).powi(2);
    for j in 1..m {
        let s = profile.sqrt_wbar_regularized(j);
        let w = s * s;
        integrand[j] = (1.0 + psi[j]).powi(2) * profile.rho[j] * (v[j] / w).powi(2);
    }
    let lhs = crate::mesh::trapezoid(&integrand, &profile.grid);
    let rho_face = profile.rho_at_midpoints();
    let rhs: f64 = (0..m - 1)
        .map(|k| {
            let h = profile.grid.spacing(k);
            rho_face[k] * (v[k + 1] - v[k]).powi(2) / h
        })
        .sum();
    if !(rhs > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(HardyRatio { lhs, rhs, ratio: lhs / rhs })
}

/// Discrete `psi omega_bar'`, the predicted principal eigenfunction.
pub fn predicted_mode(profile: &SelfSimilarProfile) -> Vec<f64> {
    profile.psi().iter().zip(&profile.wbar_p).map(|(p, w)| p * w).collect()
}

/// Relative mass-norm distance between two nodal vectors after normalizing both.
pub fn mode_distance(mats: &OperatorMatrices, a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (interior(a), interior(b));
    let na = mats.mass_form(a, a).sqrt();
    let nb = mats.mass_form(b, b).sqrt();
    let d: Vec<f64> = (0..a.len()).map(|i| a[i] / na - b[i] / nb).collect();
    mats.mass_form(&d, &d).sqrt()
}

/// Seeded battery of smooth admissible test vectors: `v(0) = 0`, nonnegative,
/// Gaussian-type decay and zero on the last 5 nodes.
pub fn random_battery(grid: &PsiGrid, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = grid.nodes();
    let m = psi.len();
    let cut = psi[m - 6];
    (0..count)
        .map(|_| {
            let power = rng.gen_range(0.5..2.5);
            let width = rng.gen_range(0.4..3.0);
            let center = rng.gen_range(0.0..0.5 * cut);
            let wiggle = rng.gen_range(0.0..0.9);
            let freq = rng.gen_range(0.5..4.0);
            let mut v: Vec<f64> = psi
                .iter()
                .map(|&p| {
                    let taper = (1.0 - (p / cut).powi(2)).max(0.0).powi(2);
                    let bump = (-((p - center) / width).powi(2)).exp();
                    p.powf(power) * bump * (1.0 + wiggle * (freq * p).sin()) * taper
                })
                .collect();
            v[0] = 0.0;
            for x in v[m - 5..].iter_mut() {
                *x = 0.0;
            }
            v
        })
        .collect()
}
