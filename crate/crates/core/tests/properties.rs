use std::sync::{Arc, OnceLock};

use prandtl_core::march::{march, observed_envelope, uniform_stations, GuardFlags, MarchConfig, Marcher, Scheme};
use prandtl_core::presets::Inflow;
use prandtl_core::similarity::{build_self_similar, psi_max_for_tail, SelfSimilarProfile, TAIL_TOL};
use prandtl_core::spectral::{assemble, check_hardy, principal_eigen, rayleigh, EigenResult, OperatorMatrices};
use prandtl_core::{ingest_initial, solve_blasius, BlasiusProfile, GridSpec, InitialProfile, OmegaField};
use proptest::prelude::*;

fn blasius() -> &'static BlasiusProfile {
    static B: OnceLock<BlasiusProfile> = OnceLock::new();
    B.get_or_init(|| solve_blasius(10.0, 1e-3, 1e-10).unwrap())
}

fn march_profile() -> &'static SelfSimilarProfile {
    static S: OnceLock<SelfSimilarProfile> = OnceLock::new();
    S.get_or_init(|| build_self_similar(blasius(), &GridSpec::new(12.0, 256)).unwrap())
}

fn spectral() -> &'static (SelfSimilarProfile, OperatorMatrices, EigenResult) {
    static S: OnceLock<(SelfSimilarProfile, OperatorMatrices, EigenResult)> = OnceLock::new();
    S.get_or_init(|| {
        let pm = psi_max_for_tail(blasius(), TAIL_TOL).unwrap();
        let ss = build_self_similar(blasius(), &GridSpec::new(pm, 256)).unwrap();
        let m = assemble(&ss).unwrap();
        let e = principal_eigen(&m, 1e-12).unwrap();
        (ss, m, e)
    })
}

fn equilibrium(ss: &SelfSimilarProfile, d: f64) -> OmegaField {
    let mut w = ss.wbar.clone();
    *w.last_mut().unwrap() = 1.0;
    OmegaField::new(ss.grid.clone(), w, d.ln(), d).unwrap()
}

// Strict increase wherever the local increment `inc(k)` is representable next
// to the value; non-decreasing where it falls below a few ulps. Profiles built
// from the Blasius table cannot resolve steps finer than one integration step.
fn strictly_increasing(v: &[f64], inc: impl Fn(usize) -> f64) -> bool {
    (0..v.len() - 1).all(|k| if inc(k) > 4.0 * f64::EPSILON * v[k].abs() { v[k + 1] > v[k] } else { v[k + 1] >= v[k] })
}

// nodal vector with v(0) = 0 and zeros on the last 5 nodes
fn admissible(raw: &[f64], len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for (j, x) in raw.iter().enumerate().take(len - 6) {
        v[j + 1] = *x;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn blasius_profile_invariants(z_max in 8.0f64..14.0, k in 1usize..4) {
        let b = solve_blasius(z_max, 1e-3 * k as f64, 1e-10).unwrap();
        prop_assert_eq!((b.f[0], b.fp[0]), (0.0, 0.0));
        prop_assert!(b.fpp[0] == b.b0 && b.b0 > 0.0);
        prop_assert!(b.fpp.iter().all(|&v| v > 0.0));
        prop_assert!(strictly_increasing(&b.fp, |k| b.fpp[k] * b.step));
        let last = b.fp[b.len() - 1];
        prop_assert!(last <= 1.0 + 1e-10 && last >= 1.0 - TAIL_TOL);
        prop_assert!(b.ode_residual < 1e-6);
        prop_assert!(b.z.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn self_similar_invariants(frac in 0.0f64..1.0, cells in 64usize..700) {
        let b = blasius();
        let lo = psi_max_for_tail(b, TAIL_TOL).unwrap();
        let pm = lo + frac * (12.0 - lo);
        let ss = build_self_similar(b, &GridSpec::new(pm, cells)).unwrap();
        prop_assert_eq!(ss.wbar[0], 0.0);
        prop_assert!(strictly_increasing(&ss.wbar, |k| ss.wbar_p[k] * ss.grid.spacing(k).min(2f64.sqrt() * b.step)));
        let top = ss.wbar[ss.len() - 1];
        prop_assert!(top <= 1.0 && top >= 1.0 - TAIL_TOL);
        prop_assert!((ss.wall_slope() - 2f64.sqrt() * b.b0).abs() < 1e-8);
        prop_assert_eq!(ss.rho[0], 1.0);
        prop_assert!(ss.log_rho.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(ss.wbar_pp.iter().all(|&v| v <= 1e-12));
        prop_assert!(ss.identity_residual() < 1e-6);
        let gap: Vec<f64> = ss.psi().iter().zip(&ss.log_rho).map(|(p, l)| l - p * p / 4.0).collect();
        prop_assert!(gap.iter().all(|g| g.is_finite() && g.abs() < 10.0));
    }

    #[test]
    fn grids_are_clustered_and_monotone(psi_max in 1.0f64..30.0, cells in 64usize..5000) {
        let g = GridSpec::new(psi_max, cells).build().unwrap();
        prop_assert_eq!(g.cells(), cells);
        prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(g.nodes()[0], 0.0);
        prop_assert_eq!(g.psi_max(), psi_max);
        prop_assert!(g.spacing(0) <= psi_max * 1e-4 * (1.0 + 1e-9));
    }

    #[test]
    fn ingested_fields_respect_boundary_data(width in 0.3f64..3.0, d in 1.0f64..4.0) {
        let ss = march_profile();
        let prof = InitialProfile::from_fn(8.0 * width, 2000, 0.0, |y| (y / width).tanh()).unwrap();
        let f = ingest_initial(&prof, d, ss.grid.clone()).unwrap();
        prop_assert!(f.boundary_ok());
        prop_assert_eq!(f.xi, d.ln());
        prop_assert!(f.values.iter().all(|&w| (0.0..=1.0).contains(&w)));
        prop_assert!(f.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn guarded_marches_stay_below_the_ceiling(s in 0.4f64..5.0, d in 1.0f64..3.0, count in 1usize..6) {
        let ss = march_profile();
        let inflow = Inflow::Shifted { s };
        let init = ingest_initial(&inflow.profile(blasius()).unwrap(), d, ss.grid.clone()).unwrap();
        let mut cfg = MarchConfig::new(d, d.ln() + 1.0, 2e-2);
        cfg.guards = GuardFlags { comparison: true, wall_slope: true, concavity: false, fatal: true };
        let traj = march(&init, ss, &cfg, &uniform_stations(d.ln(), cfg.xi_end, count)).unwrap();
        prop_assert_eq!(traj.snapshots.len(), count);
        prop_assert!(traj.xis().windows(2).all(|w| w[1] > w[0]));
        let k2 = observed_envelope(&init, ss).k2;
        let top = ss.wbar.iter().cloned().fold(0.0, f64::max);
        for f in &traj.snapshots {
            prop_assert!(f.boundary_ok());
            prop_assert!(f.values.iter().all(|&w| w >= 0.0 && w <= k2 * top + cfg.envelope_slack));
        }
        prop_assert!(traj.guard_log.iter().all(|g| g.ok && g.wall_slope > 0.0));
    }

    #[test]
    fn equilibrium_is_a_fixed_point(dxi in 1e-3f64..0.5, cn in any::<bool>()) {
        let ss = march_profile();
        let scheme = if cn { Scheme::CrankNicolson } else { Scheme::BackwardEuler };
        let f = equilibrium(ss, 1.0);
        let g = Marcher::new(ss).step(&f, dxi, scheme).unwrap();
        let dev = g.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-8, "{}", dev);
        prop_assert!((g.xi - dxi).abs() < 1e-14);
    }

    #[test]
    fn quadratic_form_is_symmetric(a in proptest::collection::vec(-1.0f64..1.0, 300), b in proptest::collection::vec(-1.0f64..1.0, 300)) {
        let (ss, m, _) = spectral();
        let (v, w) = (admissible(&a, ss.len()), admissible(&b, ss.len()));
        let (vw, wv) = (m.bilinear(&v, &w), m.bilinear(&w, &v));
        prop_assert!((vw - wv).abs() <= 1e-12 * m.bilinear(&v, &v).max(m.bilinear(&w, &w)).max(1e-300));
    }

    #[test]
    fn rayleigh_quotients_bound_the_principal_value(raw in proptest::collection::vec(0.0f64..1.0, 300)) {
        let (ss, m, e) = spectral();
        let v = admissible(&raw, ss.len());
        prop_assume!(v.iter().any(|&x| x > 0.0));
        prop_assert!(rayleigh(m, &v).unwrap() >= e.lambda1 - 1e-10);
    }

    #[test]
    fn hardy_ratio_is_scale_invariant(width in 0.3f64..3.0, scale in 1e-3f64..1e3) {
        let (ss, _, _) = spectral();
        let shape = |c: f64| -> Vec<f64> {
            let mut v: Vec<f64> = ss.psi().iter().map(|&p| c * p * (-(p / width).powi(2)).exp()).collect();
            let n = v.len();
            v[n - 5..].iter_mut().for_each(|x| *x = 0.0);
            v
        };
        let r1 = check_hardy(ss, &shape(1.0)).unwrap();
        let r2 = check_hardy(ss, &shape(scale)).unwrap();
        prop_assert!(r1.ratio.is_finite() && r1.ratio > 0.0);
        prop_assert!((r1.ratio - r2.ratio).abs() <= 1e-10 * r1.ratio);
    }
}

#[test]
fn shared_grid_is_reused_by_reference() {
    let ss = march_profile();
    let f = equilibrium(ss, 2.0);
    assert!(Arc::ptr_eq(&f.grid, &ss.grid));
    assert!(f.x().abs() < 1e-14);
}
