//! Blasius profile `f''' + f f'' = 0`, `f(0) = f'(0) = 0`, `f'(inf) = 1`.
//!
//! Solved by shooting on the wall curvature `s = f''(0)` with a fixed-step
//! classical Runge-Kutta integrator. The profile table is the reference for
//! every downstream quantity, so it offers pointwise evaluation by
//! re-integrating from the nearest node rather than by polynomial
//! interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq;

/// Shooting bracket for `f''(0)`.
pub const BRACKET: (f64, f64) = (0.1, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlasiusConfig {
    pub z_max: f64,
    pub step: f64,
    pub shoot_tol: f64,
    /// Bound on the centered-difference residual of `f''' + f f''`.
    pub residual_tol: f64,
}

impl Default for BlasiusConfig {
    fn default() -> Self {
        Self { z_max: 10.0, step: 1e-3, shoot_tol: 1e-10, residual_tol: 1e-6 }
    }
}

/// Far-field constants of `1 - f'(z) ~ N1 z^-p exp(-z^2/2 - N2 z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub n1: f64,
    pub n2: f64,
    /// Fitted algebraic power `p` (the asymptotic form has `p = 1`).
    pub power: f64,
    /// RMS residual of the log-space fit.
    pub residual: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlasiusProfile {
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
    /// Wall shear `f''(0)`.
    pub b0: f64,
    pub z_max: f64,
    pub step: f64,
    /// `f'(z_max) - 1` at the accepted shooting parameter.
    pub shoot_residual: f64,
    /// Max centered-difference residual of the ODE on interior nodes.
    pub ode_residual: f64,
    pub shoot_iters: usize,
    pub far_field: Option<FarField>,
}

type State = [f64; 3];

#[inline]
fn rhs(y: &State) -> State {
    [y[1], y[2], -y[0] * y[2]]
}

#[inline]
fn rk4(y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = rhs(y);
    let k2 = rhs(&add(y, &k1, 0.5 * h));
    let k3 = rhs(&add(y, &k2, 0.5 * h));
    let k4 = rhs(&add(y, &k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn endpoint(s: f64, h: f64, n: usize) -> f64 {
    let mut y = [0.0, 0.0, s];
    for _ in 0..n {
        y = rk4(&y, h);
    }
    y[1] - 1.0
}

/// Solves the Blasius problem with the default residual tolerance.
pub fn solve_blasius(z_max: f64, step: f64, shoot_tol: f64) -> Result<BlasiusProfile> {
    solve_blasius_with(&BlasiusConfig { z_max, step, shoot_tol, ..Default::default() })
}

pub fn solve_blasius_with(cfg: &BlasiusConfig) -> Result<BlasiusProfile> {
    if !(cfg.z_max >= 8.0) {
        return Err(Error::invalid("z_max", format!("need z_max >= 8, got {}", cfg.z_max)));
    }
    if !(cfg.step > 0.0) {
        return Err(Error::invalid("step", "must be positive"));
    }
    if !(cfg.shoot_tol > 0.0) {
        return Err(Error::invalid("shoot_tol", "must be positive"));
    }
    let n = (cfg.z_max / cfg.step).round() as usize;
    if n < 400 {
        return Err(Error::invalid("step", format!("only {n} steps on [0, z_max]; need >= 400")));
    }
    let h = cfg.z_max / n as f64;

    let (s, g, iters) = shoot(h, n, cfg.shoot_tol)?;

    let mut z = Vec::with_capacity(n + 1);
    let mut f = Vec::with_capacity(n + 1);
    let mut fp = Vec::with_capacity(n + 1);
    let mut fpp = Vec::with_capacity(n + 1);
    let mut y = [0.0, 0.0, s];
    for k in 0..=n {
        z.push(k as f64 * h);
        f.push(y[0]);
        fp.push(y[1]);
        fpp.push(y[2]);
        if k < n {
            y = rk4(&y, h);
        }
    }
    let ode_residual = (1..n)
        .map(|i| ((fpp[i + 1] - fpp[i - 1]) / (2.0 * h) + f[i] * fpp[i]).abs())
        .fold(0.0, f64::max);
    if ode_residual > cfg.residual_tol {
        return Err(Error::StepTooLarge { residual: ode_residual, tol: cfg.residual_tol });
    }
    let mut profile = BlasiusProfile {
        z,
        f,
        fp,
        fpp,
        b0: s,
        z_max: cfg.z_max,
        step: h,
        shoot_residual: g,
        ode_residual,
        shoot_iters: iters,
        far_field: None,
    };
    profile.far_field = fit_far_field(&profile, profile.default_fit_window()).ok();
    Ok(profile)
}

// Bisection down to a narrow bracket, then safeguarded secant.
fn shoot(h: f64, n: usize, tol: f64) -> Result<(f64, f64, usize)> {
    let (mut lo, mut hi) = BRACKET;
    let mut g_lo = endpoint(lo, h, n);
    let mut g_hi = endpoint(hi, h, n);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NoBracket { lo, hi, g_lo, g_hi });
    }
    let mut iters = 0;
    let check = |s: f64, g: f64, g_lo: f64, g_hi: f64| {
        if g < g_lo || g > g_hi || !g.is_finite() {
            Err(Error::NonMonotoneShooting { s })
        } else {
            Ok(())
        }
    };
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let g = endpoint(mid, h, n);
        iters += 1;
        check(mid, g, g_lo, g_hi)?;
        if g.abs() < tol {
            return Ok((mid, g, iters));
        }
        if g < 0.0 {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }
    let (mut s0, mut g0, mut s1, mut g1) = (lo, g_lo, hi, g_hi);
    for _ in 0..200 {
        let mut s = s1 - g1 * (s1 - s0) / (g1 - g0);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let g = endpoint(s, h, n);
        iters += 1;
        check(s, g, g_lo, g_hi)?;
        if g.abs() < tol {
            return Ok((s, g, iters));
        }
        if g < 0.0 {
            lo = s;
            g_lo = g;
        } else {
            hi = s;
            g_hi = g;
        }
        (s0, g0, s1, g1) = (s1, g1, s, g);
        if hi - lo <= f64::EPSILON * hi {
            return Err(Error::NoConvergence { what: "shooting", iters, last: g.abs() });
        }
    }
    Err(Error::NoConvergence { what: "shooting", iters, last: g1.abs() })
}

/// Pointwise values `(f, f', f'')` at arbitrary `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlasiusPoint {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

impl BlasiusPoint {
    /// `f''' = -f f''`.
    pub fn fppp(&self) -> f64 {
        -self.f * self.fpp
    }
}

impl BlasiusProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Evaluates by one Runge-Kutta step from the nearest node at or below `z`.
    /// Past `z_max` the profile continues as the uniform stream.
    pub fn eval(&self, z: f64) -> BlasiusPoint {
        let n = self.z.len() - 1;
        if z >= self.z_max {
            return BlasiusPoint { f: self.f[n] + (z - self.z_max) * self.fp[n], fp: self.fp[n], fpp: 0.0 };
        }
        let z = z.max(0.0);
        let k = ((z / self.step).floor() as usize).min(n - 1);
        let dz = z - self.z[k];
        let y = [self.f[k], self.fp[k], self.fpp[k]];
        let y = if dz > 0.0 { rk4(&y, dz) } else { y };
        BlasiusPoint { f: y[0], fp: y[1], fpp: y[2] }
    }

    /// Inverts `f(z) = target` by Newton iteration on [`Self::eval`].
    pub fn z_for_f(&self, target: f64) -> Result<f64> {
        let n = self.z.len() - 1;
        if target <= 0.0 {
            return Ok(0.0);
        }
        if target > self.f[n] {
            return Err(Error::OutOfRange { value: target, lo: 0.0, hi: self.f[n] });
        }
        let k = self.f.partition_point(|&v| v <= target).saturating_sub(1).min(n - 1);
        if !(self.f[k + 1] > self.f[k]) {
            return Err(Error::NonMonotone { at: self.z[k] });
        }
        // near the wall f ~ b0 z^2 / 2, so seed with the quadratic inverse there
        let mut z = if k == 0 {
            (2.0 * target / self.b0).sqrt().min(self.z[1])
        } else {
            self.z[k] + (target - self.f[k]) / (self.f[k + 1] - self.f[k]) * self.step
        };
        for _ in 0..50 {
            let p = self.eval(z);
            let dz = (p.f - target) / p.fp.max(1e-300);
            z = (z - dz).clamp(self.z[k], self.z[k + 1]);
            if dz.abs() <= 1e-15 * z.max(1e-300) {
                break;
            }
        }
        Ok(z)
    }

    /// Gap `1 - f'` at each node, formed as the tail integral of `f''`.
    ///
    /// Differencing `1 - f'` directly loses all digits once the gap falls
    /// below the shooting tolerance.
    pub fn tail_gap(&self) -> Vec<f64> {
        let n = self.z.len() - 1;
        let h = self.step;
        let mut gap = vec![0.0; n + 1];
        // beyond z_max: f'' ~ z (1 - f')
        gap[n] = self.fpp[n] / self.z_max;
        for k in (0..n).rev() {
            let d0 = -self.f[k] * self.fpp[k];
            let d1 = -self.f[k + 1] * self.fpp[k + 1];
            let cell = 0.5 * h * (self.fpp[k] + self.fpp[k + 1]) + h * h / 12.0 * (d0 - d1);
            gap[k] = gap[k + 1] + cell;
        }
        gap
    }

    pub fn default_fit_window(&self) -> (f64, f64) {
        (0.6 * self.z_max, 0.95 * self.z_max)
    }

    /// Far-field model `N1 z^-power exp(-z^2/2 - N2 z)`.
    pub fn far_field_gap(ff: &FarField, z: f64) -> f64 {
        ff.n1 * z.powf(-ff.power) * (-0.5 * z * z - ff.n2 * z).exp()
    }
}

/// Smallest gap accepted by the far-field fit.
pub const UNDERFLOW_FLOOR: f64 = 1e-290;

/// Least-squares fit of `log(1 - f') + z^2/2` on `{1, -log z, -z}`.
pub fn fit_far_field(profile: &BlasiusProfile, window: (f64, f64)) -> Result<FarField> {
    let (a, b) = window;
    let (lo, hi) = (0.6 * profile.z_max, 0.95 * profile.z_max);
    if !(a >= lo - 1e-12 && b <= hi + 1e-12 && b > a) {
        return Err(Error::invalid("fit_window", format!("[{a}, {b}] must lie inside [{lo}, {hi}]")));
    }
    let gap = profile.tail_gap();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (k, &z) in profile.z.iter().enumerate() {
        if z < a || z > b {
            continue;
        }
        if !(gap[k] > UNDERFLOW_FLOOR) {
            return Err(Error::Underflow { z });
        }
        rows.push(vec![1.0, -z.ln(), -z]);
        y.push(gap[k].ln() + 0.5 * z * z);
    }
    if rows.len() < 3 {
        return Err(Error::invalid("fit_window", "fewer than 3 nodes inside the window"));
    }
    let (c, r) = lsq::fit(&rows, &y).ok_or_else(|| Error::invalid("fit_window", "singular fit"))?;
    let residual = (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt();
    Ok(FarField { n1: c[0].exp(), power: c[1], n2: c[2], residual, window })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> BlasiusProfile {
        solve_blasius(10.0, 1e-3, 1e-10).unwrap()
    }

    #[test]
    fn boundary_data_and_shape() {
        let p = reference();
        assert_eq!((p.f[0], p.fp[0]), (0.0, 0.0));
        assert!(p.shoot_residual.abs() < 1e-10);
        assert!(p.ode_residual < 1e-6);
        assert!(p.fp.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.fpp.iter().all(|&v| v > 0.0));
        let last = p.fp[p.len() - 1];
        assert!(last <= 1.0 + 1e-10 && last >= 1.0 - 1e-3);
    }

    #[test]
    fn wall_shear_matches_refined_rerun() {
        // oracle: identical shooting at step / 10
        let fine = solve_blasius(10.0, 1e-4, 1e-12).unwrap();
        let p = reference();
        assert!((p.b0 - fine.b0).abs() < 1e-8);
        assert!((p.b0 - 0.46960).abs() < 1e-4);
    }

    #[test]
    fn short_domain_and_coarse_step_are_rejected() {
        assert!(matches!(solve_blasius(2.0, 1e-3, 1e-10), Err(Error::InvalidParameter { .. })));
        assert!(solve_blasius(10.0, 0.05, 1e-10).is_err());
        let coarse = solve_blasius_with(&BlasiusConfig { step: 0.025, ..Default::default() });
        assert!(matches!(coarse, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn wall_shear_converges_at_fourth_order() {
        let b0 = |step: f64| {
            solve_blasius_with(&BlasiusConfig { step, shoot_tol: 1e-14, residual_tol: 1.0, ..Default::default() })
                .unwrap()
                .b0
        };
        let (a, b, c) = (b0(0.025), b0(0.0125), b0(0.00625));
        let ratio = (a - b) / (b - c);
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn pointwise_evaluation_hits_nodes_and_inverts() {
        let p = reference();
        let q = p.eval(p.z[1234]);
        assert_eq!(q.fp, p.fp[1234]);
        let mid = p.eval(3.21055);
        let z = p.z_for_f(mid.f).unwrap();
        assert!((z - 3.21055).abs() < 1e-12);
        let tiny = p.z_for_f(1e-9).unwrap();
        assert!((p.eval(tiny).f - 1e-9).abs() < 1e-20);
    }

    #[test]
    fn far_field_fit() {
        let p = reference();
        let ff = fit_far_field(&p, (6.0, 9.5)).unwrap();
        assert!(ff.n1 > 0.0);
        // f ~ z - beta gives N2 = -beta with beta the displacement constant
        let n = p.len() - 1;
        let beta = p.z_max - p.f[n];
        assert!((ff.n2 + beta).abs() < 0.1, "N2 {} vs -beta {}", ff.n2, -beta);
        let gap = p.tail_gap();
        let k = (7.75 / p.step).round() as usize;
        let model = BlasiusProfile::far_field_gap(&ff, p.z[k]);
        assert!((model / gap[k] - 1.0).abs() < 0.05);
        assert!(fit_far_field(&p, (2.0, 9.0)).is_err());
    }

    #[test]
    fn curvature_tracks_gap_far_out() {
        let p = solve_blasius(20.0, 1e-3, 1e-10).unwrap();
        let gap = p.tail_gap();
        let ratio = |z: f64| {
            let k = (z / p.step).round() as usize;
            p.fpp[k] / (p.z[k] * gap[k])
        };
        let (r10, r15, r19) = (ratio(10.0), ratio(15.0), ratio(19.0));
        assert!(r10 < r15 && r15 < r19 && r19 < 1.0);
        assert!((r19 - 1.0).abs() < 0.1, "ratio {r19}");
    }
}
