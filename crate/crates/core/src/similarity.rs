//! Self-similar profile `omega_bar(psi)` and the energy weights `rho`, `A`.
//!
//! With `psi = sqrt(2) f(z)` the Blasius solution becomes the steady state
//! `omega_bar = f'(z)^2` of the marching equation, with
//! `omega_bar' = sqrt(2) f''` and `omega_bar'' = f''' / f' = -f f'' / f'`.
//! The weight is `rho = exp(int_0^psi s / (2 sqrt(omega_bar)) ds)` and
//! `A = rho / sqrt(omega_bar)`.
//!
//! Near the wall `omega_bar ~ sqrt(2) b0 psi`; divisions by `sqrt(omega_bar)`
//! on the first two cells use that linearization, and `A` (which behaves like
//! `psi^-1/2`) is never materialised at `psi = 0`.

use std::sync::Arc;

use serde::Serialize;

use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};
use crate::interp::{hermite, locate};
use crate::mesh::{d1, d2, GridSpec, PsiGrid};

/// Default bound on `1 - omega_bar(psi_max)`.
pub const TAIL_TOL: f64 = 1e-3;
/// Bound on the `A`-mass fraction of the principal mode beyond `psi_max`.
pub const MODE_TAIL_TOL: f64 = 1e-6;
/// Distance to the far-field value below which consecutive values may coincide in floating point.
pub const SATURATION: f64 = 1e-12;

/// `omega_bar` and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityPoint {
    pub wbar: f64,
    pub wbar_p: f64,
    pub wbar_pp: f64,
}

/// Evaluates the self-similar profile at `psi` straight from the Blasius solution.
pub fn similarity_point(blasius: &BlasiusProfile, psi: f64) -> Result<SimilarityPoint> {
    if psi < 0.0 {
        return Err(Error::OutOfRange { value: psi, lo: 0.0, hi: f64::INFINITY });
    }
    let n = blasius.len() - 1;
    if psi > std::f64::consts::SQRT_2 * blasius.f[n] {
        // uniform stream beyond the table
        return Ok(SimilarityPoint { wbar: blasius.fp[n] * blasius.fp[n], wbar_p: 0.0, wbar_pp: 0.0 });
    }
    let z = blasius.z_for_f(psi / std::f64::consts::SQRT_2)?;
    let p = blasius.eval(z);
    let wbar_pp = if z > 0.0 { -p.f * p.fpp / p.fp } else { 0.0 };
    Ok(SimilarityPoint { wbar: p.fp * p.fp, wbar_p: std::f64::consts::SQRT_2 * p.fpp, wbar_pp })
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfSimilarProfile {
    #[serde(skip)]
    pub grid: Arc<PsiGrid>,
    pub wbar: Vec<f64>,
    pub wbar_p: Vec<f64>,
    pub wbar_pp: Vec<f64>,
    pub rho: Vec<f64>,
    pub log_rho: Vec<f64>,
    /// `A = rho / sqrt(omega_bar)` for `psi > 0`. The wall entry is 0 and
    /// carries no meaning; near the wall `A ~ a_wall_coeff / sqrt(psi)`.
    pub a_weight: Vec<f64>,
    pub a_wall_coeff: f64,
    pub b0: f64,
    pub psi_max: f64,
}

/// Value of `A` as reported to arithmetic consumers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AWeight {
    Value(f64),
    /// At the wall `A dpsi ~ coeff psi^-1/2 dpsi` is integrable but `A` is not finite.
    WallSingular { coeff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub rho: f64,
    pub a: AWeight,
}

impl SelfSimilarProfile {
    pub fn psi(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.wbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wbar.is_empty()
    }

    /// Near-wall slope `omega_bar'(0) = sqrt(2) b0`.
    pub fn wall_slope(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.b0
    }

    /// `sqrt(omega_bar)` with the wall linearization on the first two cells.
    pub fn sqrt_wbar_regularized(&self, j: usize) -> f64 {
        if j <= 2 {
            (self.wall_slope() * self.psi()[j]).sqrt()
        } else {
            self.wbar[j].sqrt()
        }
    }

    /// Pointwise residual of `sqrt(omega_bar) omega_bar'' + psi omega_bar' / 2`
    /// with the stored (chain-rule) derivatives.
    pub fn identity_residual(&self) -> f64 {
        (0..self.len())
            .map(|j| (self.wbar[j].sqrt() * self.wbar_pp[j] + 0.5 * self.psi()[j] * self.wbar_p[j]).abs())
            .fold(0.0, f64::max)
    }

    /// Same residual with `omega_bar'` and `omega_bar''` replaced by grid differences.
    pub fn discrete_residual(&self) -> Vec<f64> {
        let (w1, w2) = (d1(&self.wbar, &self.grid), d2(&self.wbar, &self.grid));
        (0..self.len()).map(|j| self.wbar[j].sqrt() * w2[j] + 0.5 * self.psi()[j] * w1[j]).collect()
    }

    /// Eigen-pair identity `-2 sqrt(omega_bar) omega_bar'' = psi omega_bar'`:
    /// max pointwise defect.
    pub fn eigen_identity_defect(&self) -> f64 {
        (0..self.len())
            .map(|j| (-2.0 * self.wbar[j].sqrt() * self.wbar_pp[j] - self.psi()[j] * self.wbar_p[j]).abs())
            .fold(0.0, f64::max)
    }

    /// `omega_bar` at arbitrary `psi` by cubic Hermite interpolation.
    pub fn wbar_at(&self, psi: f64) -> f64 {
        let x = self.psi();
        let k = locate(x, psi);
        hermite(x[k], x[k + 1], self.wbar[k], self.wbar[k + 1], self.wbar_p[k], self.wbar_p[k + 1], psi)
    }

    fn log_rho_slope(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.psi()[j] / (2.0 * self.sqrt_wbar_regularized(j))
        }
    }

    /// Interpolated weights at `psi`.
    pub fn weights_at(&self, psi: f64) -> Result<Weights> {
        if !(psi >= 0.0 && psi <= self.psi_max) {
            return Err(Error::OutOfRange { value: psi, lo: 0.0, hi: self.psi_max });
        }
        if psi == 0.0 {
            return Ok(Weights { rho: 1.0, a: AWeight::WallSingular { coeff: self.a_wall_coeff } });
        }
        let x = self.psi();
        let k = locate(x, psi);
        let log_rho = hermite(
            x[k],
            x[k + 1],
            self.log_rho[k],
            self.log_rho[k + 1],
            self.log_rho_slope(k),
            self.log_rho_slope(k + 1),
            psi,
        );
        let rho = log_rho.exp();
        let sqrt_w = if psi <= x[2] { (self.wall_slope() * psi).sqrt() } else { self.wbar_at(psi).sqrt() };
        Ok(Weights { rho, a: AWeight::Value(rho / sqrt_w) })
    }

    /// `rho` at the cell midpoints, for flux-form assembly.
    pub fn rho_at_midpoints(&self) -> Vec<f64> {
        self.grid
            .midpoints()
            .into_iter()
            .map(|m| self.weights_at(m).map(|w| w.rho).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Builds the self-similar profile on the grid described by `spec`.
pub fn build_self_similar(blasius: &BlasiusProfile, spec: &GridSpec) -> Result<SelfSimilarProfile> {
    let grid = Arc::new(spec.build()?);
    build_on_grid(blasius, grid)
}

/// Builds the self-similar profile on an existing grid.
pub fn build_on_grid(blasius: &BlasiusProfile, grid: Arc<PsiGrid>) -> Result<SelfSimilarProfile> {
    let n = blasius.len() - 1;
    let psi_cap = std::f64::consts::SQRT_2 * blasius.f[n];
    if grid.psi_max() > psi_cap * (1.0 + 1e-12) {
        return Err(Error::invalid("psi_max", format!("{} exceeds sqrt(2) f(z_max) = {psi_cap}", grid.psi_max())));
    }
    if let Some(k) = (1..=n).find(|&k| !(blasius.f[k] > blasius.f[k - 1])) {
        return Err(Error::NonMonotone { at: blasius.z[k] });
    }
    let psi = grid.nodes();
    let m = psi.len();
    let mut wbar = Vec::with_capacity(m);
    let mut wbar_p = Vec::with_capacity(m);
    let mut wbar_pp = Vec::with_capacity(m);
    for &p in psi {
        let pt = similarity_point(blasius, p)?;
        wbar.push(pt.wbar);
        wbar_p.push(pt.wbar_p);
        wbar_pp.push(pt.wbar_pp);
    }
    // strict increase is only resolvable while the gap 1 - omega_bar exceeds round-off
    let w_end = blasius.fp[n] * blasius.fp[n];
    for j in 1..m {
        let saturated = wbar[j - 1] >= w_end - SATURATION;
        if !(wbar[j] > wbar[j - 1]) && !(saturated && wbar[j] > wbar[j - 1] - SATURATION) {
            return Err(Error::NonMonotone { at: psi[j] });
        }
        wbar[j] = wbar[j].max(wbar[j - 1]);
    }
    let b0 = blasius.b0;
    let slope = std::f64::consts::SQRT_2 * b0;
    let sqrt_w = |j: usize| if j <= 2 { (slope * psi[j]).sqrt() } else { wbar[j].sqrt() };

    // log rho: analytic first cell with omega_bar ~ slope * s, trapezoid after
    let mut log_rho = vec![0.0; m];
    log_rho[1] = psi[1].powf(1.5) / (3.0 * slope.sqrt());
    for j in 2..m {
        let g0 = psi[j - 1] / (2.0 * sqrt_w(j - 1));
        let g1 = psi[j] / (2.0 * sqrt_w(j));
        log_rho[j] = log_rho[j - 1] + 0.5 * (g0 + g1) * (psi[j] - psi[j - 1]);
    }
    let rho: Vec<f64> = log_rho.iter().map(|v| v.exp()).collect();
    let mut a_weight = vec![0.0; m];
    for j in 1..m {
        a_weight[j] = rho[j] / sqrt_w(j);
    }
    Ok(SelfSimilarProfile {
        psi_max: grid.psi_max(),
        grid,
        wbar,
        wbar_p,
        wbar_pp,
        rho,
        log_rho,
        a_weight,
        a_wall_coeff: 1.0 / slope.sqrt(),
        b0,
    })
}

/// Truncation point chosen from the profile: the smallest `psi` where
/// `1 - omega_bar <= tail_tol` and the principal mode `psi omega_bar'`
/// keeps at most [`MODE_TAIL_TOL`] of its `A`-mass beyond it.
///
/// Both tails are computed on the Blasius table in the `z` variable, where
/// `log rho = int_0^z f` and `A (psi omega_bar')^2 dpsi = 4 sqrt(2) rho f^2 f''^2 dz`.
pub fn psi_max_for_tail(blasius: &BlasiusProfile, tail_tol: f64) -> Result<f64> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::invalid("tail_tol", "must lie in (0, 1)"));
    }
    let n = blasius.len() - 1;
    let h = blasius.step;
    let mut log_rho = vec![0.0; n + 1];
    for k in 1..=n {
        log_rho[k] = log_rho[k - 1] + 0.5 * h * (blasius.f[k - 1] + blasius.f[k]);
    }
    // work relative to the largest exponent to avoid overflow
    let dens: Vec<f64> = (0..=n).map(|k| log_rho[k] + 2.0 * (blasius.f[k] * blasius.fpp[k]).max(1e-300).ln()).collect();
    let peak = dens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass: Vec<f64> = dens.iter().map(|d| (d - peak).exp()).collect();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + 0.5 * h * (mass[k] + mass[k + 1]);
    }
    let total = tail[0];
    let gap = blasius.tail_gap();
    let k = (0..=n)
        .find(|&k| {
            let wgap = 1.0 - (1.0 - gap[k]).powi(2);
            wgap <= tail_tol && tail[k] <= MODE_TAIL_TOL * total
        })
        .ok_or_else(|| Error::invalid("tail_tol", "no truncation point inside the Blasius table"))?;
    Ok(std::f64::consts::SQRT_2 * blasius.f[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blasius::solve_blasius;

    fn setup(cells: usize) -> (BlasiusProfile, SelfSimilarProfile) {
        let b = solve_blasius(10.0, 1e-3, 1e-10).unwrap();
        let pm = psi_max_for_tail(&b, TAIL_TOL).unwrap();
        let p = build_self_similar(&b, &GridSpec::new(pm, cells)).unwrap();
        (b, p)
    }

    // log rho = int_0^z f dz along the Blasius table
    fn log_rho_oracle(b: &BlasiusProfile, psi: f64) -> f64 {
        let z = b.z_for_f(psi / std::f64::consts::SQRT_2).unwrap();
        let k = ((z / b.step) as usize).min(b.len() - 2);
        let mut acc = 0.0;
        for i in 0..k {
            acc += 0.5 * b.step * (b.f[i] + b.f[i + 1]);
        }
        let fz = b.eval(z).f;
        acc + 0.5 * (z - b.z[k]) * (b.f[k] + fz)
    }

    #[test]
    fn truncation_and_wall_data() {
        let (_, p) = setup(1024);
        assert!(p.wbar[p.len() - 1] >= 1.0 - TAIL_TOL);
        assert!(p.wbar[p.len() - 1] <= 1.0);
        assert_eq!(p.wbar[0], 0.0);
        assert!((p.wbar_p[0] - 0.66412).abs() < 1e-3, "{}", p.wbar_p[0]);
        assert!(p.wbar.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn profile_is_concave_in_psi() {
        let (_, p) = setup(512);
        for j in 0..p.len() {
            assert!(p.wbar[j].sqrt() * p.wbar_pp[j] <= 0.0, "node {j}");
        }
    }

    #[test]
    fn steady_equation_holds() {
        let (_, p) = setup(1024);
        assert!(p.identity_residual() < 1e-12);
        assert!(p.eigen_identity_defect() < 1e-12);
        let worst = |p: &SelfSimilarProfile| {
            let r = p.discrete_residual();
            (1..r.len() - 1).filter(|&j| p.psi()[j] > 0.1).fold(0.0f64, |m, j| m.max(r[j].abs()))
        };
        let (_, p2) = setup(2048);
        let (r1, r2) = (worst(&p), worst(&p2));
        assert!(r1 < 1e-3, "{r1}");
        assert!(r1 / r2 > 3.0, "ratio {}", r1 / r2);
    }

    #[test]
    fn chain_rule_second_derivative_matches_differences() {
        let err = |cells: usize| {
            let (_, p) = setup(cells);
            let dd = d1(&p.wbar_p, &p.grid);
            (2..p.len() - 2)
                .filter(|&j| p.psi()[j] > 0.1)
                .map(|j| (dd[j] - p.wbar_pp[j]).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(512), err(1024));
        assert!(a / b > 3.0, "{a} {b}");
    }

    #[test]
    fn rho_matches_integral_of_f() {
        let (b, p) = setup(1024);
        for j in (1..p.len()).step_by(37) {
            let exact = log_rho_oracle(&b, p.psi()[j]);
            assert!((p.log_rho[j] - exact).abs() < 1e-5 * (1.0 + exact), "psi {} {} {}", p.psi()[j], p.log_rho[j], exact);
        }
    }

    #[test]
    fn rho_grows_like_gaussian() {
        let (_, p) = setup(1024);
        assert_eq!(p.rho[0], 1.0);
        assert!(p.rho.windows(2).all(|w| w[1] > w[0]));
        let psi = 0.9 * p.psi_max;
        let w = p.weights_at(psi).unwrap();
        let ratio = w.rho.ln() / (psi * psi / 4.0);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
        // log rho - psi^2/4 settles to a constant
        let tail: Vec<f64> = (p.len() - 200..p.len()).map(|j| p.log_rho[j] - p.psi()[j].powi(2) / 4.0).collect();
        let spread = tail.iter().cloned().fold(f64::MIN, f64::max) - tail.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.05, "{spread}");
    }

    #[test]
    fn weights_at_wall_and_bounds() {
        let (_, p) = setup(256);
        let w0 = p.weights_at(0.0).unwrap();
        assert_eq!(w0.rho, 1.0);
        assert!(matches!(w0.a, AWeight::WallSingular { coeff } if coeff > 0.0));
        assert!(matches!(p.weights_at(-0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(p.weights_at(p.psi_max + 0.1), Err(Error::OutOfRange { .. })));
        for k in 1..200 {
            let psi = p.psi_max * k as f64 / 200.0;
            let w = p.weights_at(psi).unwrap();
            match w.a {
                AWeight::Value(a) => assert!(a.is_finite() && a >= w.rho, "psi {psi}"),
                AWeight::WallSingular { .. } => panic!("interior point reported as singular"),
            }
        }
    }

    #[test]
    fn psi_max_beyond_table_is_rejected() {
        let b = solve_blasius(10.0, 1e-3, 1e-10).unwrap();
        let err = build_self_similar(&b, &GridSpec::new(20.0, 128)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
    }

    #[test]
    fn tail_choice_meets_both_tolerances() {
        let b = solve_blasius(10.0, 1e-3, 1e-10).unwrap();
        let pm = psi_max_for_tail(&b, TAIL_TOL).unwrap();
        let pt = similarity_point(&b, pm).unwrap();
        assert!(1.0 - pt.wbar <= TAIL_TOL);
        assert!(pm < std::f64::consts::SQRT_2 * b.f[b.len() - 1]);
        assert!(psi_max_for_tail(&b, 1e-6).unwrap() >= pm);
    }
}
