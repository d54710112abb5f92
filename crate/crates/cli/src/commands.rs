//! Subcommand drivers. Each writes its artifacts under the output directory
//! and returns a short JSON summary for stdout.

use std::path::Path;

use anyhow::{Context, Result};
use prandtl_core::diagnostics::{fit_all, log_stations, run_decay, sharpness_family, DecayRun, PAIRS};
use prandtl_core::march::{march, uniform_stations, MarchConfig, Trajectory};
use prandtl_core::presets::Inflow;
use prandtl_core::similarity::{build_self_similar, psi_max_for_tail, SelfSimilarProfile};
use prandtl_core::spectral::{assemble, mode_distance, predicted_mode, principal_eigen, random_battery, rayleigh, second_eigen};
use prandtl_core::{fit_far_field, ingest_initial, solve_blasius_with, BlasiusProfile, GridSpec, InitialProfile, OmegaField};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifacts::{ensure_dir, fmt_f, write_csv, write_json, write_table};
use crate::config::{ConfigError, Preset, RunConfig};

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    schema: u32,
    command: &'static str,
    config: &'a RunConfig,
    result: T,
}

fn artifact<T: Serialize>(dir: &Path, name: &str, command: &'static str, config: &RunConfig, result: T) -> Result<()> {
    write_json(&dir.join(name), &Artifact { schema: SCHEMA, command, config, result })
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build().context("cannot start worker pool")
}

#[derive(Debug, Clone, Serialize)]
pub struct BlasiusSummary {
    pub b0: f64,
    pub n1: f64,
    pub n2: f64,
    /// `|f'(z_max) - 1|`.
    pub residual: f64,
    pub ode_residual: f64,
    pub far_field_power: f64,
    pub far_field_fit_residual: f64,
    pub shoot_iters: usize,
}

pub fn cmd_blasius(cfg: &RunConfig) -> Result<Value> {
    let b = solve_blasius_with(&cfg.blasius)?;
    let ff = fit_far_field(&b, b.default_fit_window())?;
    let out = ensure_dir(&cfg.out)?;
    let rows = (0..b.len()).map(|k| vec![b.z[k], b.f[k], b.fp[k], b.fpp[k]]);
    write_table(&out.join("blasius_profile.csv"), &["z", "f", "fp", "fpp"], rows)?;
    let summary = BlasiusSummary {
        b0: b.b0,
        n1: ff.n1,
        n2: ff.n2,
        residual: b.shoot_residual.abs(),
        ode_residual: b.ode_residual,
        far_field_power: ff.power,
        far_field_fit_residual: ff.residual,
        shoot_iters: b.shoot_iters,
    };
    artifact(&out, "blasius.json", "blasius", cfg, &summary)?;
    Ok(serde_json::to_value(summary)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub lambda1: f64,
    pub rq: f64,
    pub iters: usize,
    pub refine_history: Vec<(usize, f64)>,
    pub residual: f64,
    pub lambda2: f64,
    pub psi_max: f64,
    pub cells: usize,
    /// Mass-norm distance to the normalized `psi omega_bar'`.
    pub mode_distance: f64,
    /// Smallest Rayleigh quotient over the seeded battery.
    pub battery_min_rayleigh: f64,
}

pub fn cmd_eigen(cfg: &RunConfig) -> Result<Value> {
    let e = &cfg.eigen;
    let b = solve_blasius_with(&cfg.blasius)?;
    let psi_max = match e.psi_max {
        Some(p) => p,
        None => psi_max_for_tail(&b, e.tail_tol)?,
    };
    let mut cells: Vec<usize> = e.refine.iter().copied().chain([e.cells]).collect();
    cells.sort_unstable();
    cells.dedup();
    let solve_at = |j: usize| -> prandtl_core::Result<_> {
        let ss = build_self_similar(&b, &GridSpec::new(psi_max, j))?;
        let mats = assemble(&ss)?;
        let eig = principal_eigen(&mats, e.tol)?;
        Ok((j, ss, mats, eig))
    };
    let runs = pool(cfg)?.install(|| cells.par_iter().map(|&j| solve_at(j)).collect::<prandtl_core::Result<Vec<_>>>())?;
    let refine_history: Vec<(usize, f64)> = runs.iter().map(|r| (r.0, r.3.lambda1)).collect();
    let (_, ss, mats, eig) = runs.into_iter().find(|r| r.0 == e.cells).expect("requested resolution was solved");

    let (lambda2, _) = second_eigen(&mats, &eig, e.tol)?;
    let distance = mode_distance(&mats, &eig.eigvec, &predicted_mode(&ss));
    let battery_min = random_battery(&ss.grid, e.battery, cfg.seed)
        .iter()
        .map(|v| rayleigh(&mats, v))
        .collect::<prandtl_core::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let out = ensure_dir(&cfg.out)?;
    let rows = ss.psi().iter().zip(&eig.eigvec).map(|(p, v)| vec![*p, *v]);
    write_table(&out.join("eigvec.csv"), &["psi", "v"], rows)?;
    let summary = EigenSummary {
        lambda1: eig.lambda1,
        rq: eig.rq,
        iters: eig.iters,
        refine_history,
        residual: eig.residual(&mats),
        lambda2,
        psi_max,
        cells: e.cells,
        mode_distance: distance,
        battery_min_rayleigh: battery_min,
    };
    artifact(&out, "eigen.json", "eigen", cfg, &summary)?;
    Ok(serde_json::to_value(summary)?)
}

/// Presets selected by name; `all` expands to the sweep battery.
fn selected(name: &str) -> Result<Vec<Preset>, ConfigError> {
    if name == "all" {
        Ok(Preset::sweep())
    } else {
        Ok(vec![Preset::parse(name)?])
    }
}

fn read_inflow_csv(path: &Path) -> Result<InitialProfile> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ConfigError::new("inflow_csv", format!("cannot read {}: {e}", path.display())))?;
    let (mut y, mut u) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| ConfigError::new("inflow_csv", format!("{}: {e}", path.display())))?;
        let get = |k: usize| -> Result<f64, ConfigError> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| ConfigError::new("inflow_csv", format!("{}: expected two numeric columns y,u", path.display())))
        };
        y.push(get(0)?);
        u.push(get(1)?);
    }
    Ok(InitialProfile::new(y, u, 0.0)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct StationSummary {
    pub xi: f64,
    pub x: f64,
    /// `max |omega - omega_bar|`.
    pub equilibrium_error: f64,
    /// `max |omega - omega_exact|` for the shifted family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub preset: String,
    pub steps: usize,
    pub guard_failures: usize,
    pub stations: Vec<StationSummary>,
    pub final_equilibrium_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_oracle_error: Option<f64>,
}

fn initial_field(cfg: &RunConfig, b: &BlasiusProfile, ss: &SelfSimilarProfile, preset: Preset) -> Result<OmegaField> {
    let s = &cfg.solve;
    if let Some(path) = &s.inflow_csv {
        return Ok(ingest_initial(&read_inflow_csv(path)?, s.d_shift, ss.grid.clone())?);
    }
    Ok(match preset {
        Preset::Equilibrium => {
            let mut w = ss.wbar.clone();
            *w.last_mut().expect("grid has nodes") = 1.0;
            OmegaField::new(ss.grid.clone(), w, s.d_shift.ln(), s.d_shift)?
        }
        Preset::Inflow(inflow) => ingest_initial(&inflow.profile(b)?, s.d_shift, ss.grid.clone())?,
    })
}

fn write_guards(dir: &Path, traj: &Trajectory) -> Result<()> {
    let rows = traj.guard_log.iter().map(|g| {
        vec![fmt_f(g.xi), fmt_f(g.k1), fmt_f(g.k2), fmt_f(g.wall_slope), fmt_f(g.max_p), (g.ok as u8).to_string()]
    });
    write_csv(&dir.join("guards.csv"), &["xi", "k1", "k2", "wall_slope", "max_p", "ok"], rows)
}

fn solve_one(cfg: &RunConfig, b: &BlasiusProfile, ss: &SelfSimilarProfile, preset: Preset, dir: &Path) -> Result<SolveSummary> {
    let s = &cfg.solve;
    let init = initial_field(cfg, b, ss, preset)?;
    let mut mc = MarchConfig::new(s.d_shift, s.xi_end, s.dxi);
    mc.scheme = s.scheme;
    mc.guards = s.guards;
    mc.picard_tol = s.picard_tol;
    mc.concavity_tol = s.concavity_tol;
    let xis = uniform_stations(s.d_shift.ln(), s.xi_end, s.stations);
    let dir = ensure_dir(dir)?;
    let traj = match march(&init, ss, &mc, &xis) {
        Ok(t) => t,
        Err(partial) => {
            write_guards(&dir, &partial.partial)?;
            return Err(partial.error.into());
        }
    };
    write_guards(&dir, &traj)?;
    let oracle = match (preset, &s.inflow_csv) {
        (Preset::Inflow(i @ Inflow::Shifted { .. }), None) => Some(i),
        _ => None,
    };
    let stations: Vec<StationSummary> = traj
        .snapshots
        .iter()
        .map(|f| {
            let eq = f.values.iter().zip(&ss.wbar).map(|(a, w)| (a - w).abs()).fold(0.0, f64::max);
            let oe = oracle.map(|i| {
                (0..f.values.len())
                    .map(|j| (f.values[j] - i.exact_omega(b, f.d_shift, f.xi, ss.psi()[j]).unwrap_or(f64::NAN)).abs())
                    .fold(0.0, f64::max)
            });
            StationSummary { xi: f.xi, x: f.x(), equilibrium_error: eq, oracle_error: oe }
        })
        .collect();
    let mut rows = Vec::new();
    for f in std::iter::once(&init).chain(&traj.snapshots) {
        for (p, w) in ss.psi().iter().zip(&f.values) {
            rows.push(vec![f.xi, f.x(), *p, *w]);
        }
    }
    write_table(&dir.join("trajectory.csv"), &["xi", "x", "psi", "omega"], rows)?;
    let last = stations.last().expect("at least one station");
    let summary = SolveSummary {
        preset: s.inflow_csv.as_ref().map(|p| format!("csv:{}", p.display())).unwrap_or_else(|| preset.name()),
        steps: traj.steps,
        guard_failures: traj.guard_log.iter().filter(|g| !g.ok).count(),
        final_equilibrium_error: last.equilibrium_error,
        final_oracle_error: last.oracle_error,
        stations,
    };
    artifact(&dir, "solve.json", "solve", cfg, &summary)?;
    Ok(summary)
}

/// Runs one preset in `out` or a sweep in `out/<preset>`.
fn fan_out<T, F>(cfg: &RunConfig, presets: &[Preset], run: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Preset, &Path) -> Result<T> + Sync,
{
    if presets.len() == 1 {
        return Ok(vec![run(presets[0], &cfg.out)?]);
    }
    pool(cfg)?.install(|| presets.par_iter().map(|&p| run(p, &cfg.out.join(p.name()))).collect())
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Value> {
    let s = &cfg.solve;
    if s.stations == 0 {
        return Err(ConfigError::new("invalid_override", "solve.stations must be positive").into());
    }
    let presets = selected(&s.preset)?;
    let b = solve_blasius_with(&cfg.blasius)?;
    let ss = build_self_similar(&b, &GridSpec::new(s.psi_max, s.cells))?;
    let results = fan_out(cfg, &presets, |p, dir| solve_one(cfg, &b, &ss, p, dir))?;
    if results.len() > 1 {
        ensure_dir(&cfg.out)?;
        artifact(&cfg.out, "sweep.json", "solve", cfg, &results)?;
    }
    Ok(json!(results
        .iter()
        .map(|r| json!({"preset": r.preset, "final_equilibrium_error": r.final_equilibrium_error, "final_oracle_error": r.final_oracle_error, "guard_failures": r.guard_failures}))
        .collect::<Vec<_>>()))
}

fn decay_one(cfg: &RunConfig, b: &BlasiusProfile, ss: &SelfSimilarProfile, preset: Preset, dir: &Path) -> Result<Value> {
    let d = &cfg.decay;
    let inflow = match preset {
        Preset::Inflow(i) => i,
        Preset::Equilibrium => return Err(ConfigError::new("unknown_preset", "decay needs an inflow preset").into()),
    };
    let mut run = DecayRun::new(inflow, d.d_shift, d.dxi, d.window, d.station_count);
    if let Some(list) = &d.stations {
        run.stations = list.clone();
        if let Some(&last) = list.last() {
            run.march.xi_end = (last + d.d_shift).ln();
        }
    }
    let (report, _, _) = run_decay(b, ss, &run)?;
    let dir = ensure_dir(dir)?;
    let header = ["x", "norm_00", "norm_01", "norm_02", "norm_10"];
    write_table(&dir.join("norms.csv"), &header, report.norms.iter().map(|r| vec![r.x, r.norm_00, r.norm_01, r.norm_02, r.norm_10]))?;
    let log_rows = report.norms.iter().map(|r| std::iter::once((r.x + 1.0).ln()).chain(PAIRS.iter().map(|&p| r.get(p).ln())).collect());
    write_table(&dir.join("loglog.csv"), &["log_x1", "log_norm_00", "log_norm_01", "log_norm_02", "log_norm_10"], log_rows)?;
    let w = &report.weighted_decay;
    write_table(
        &dir.join("weighted.csv"),
        &["xi", "a_norm", "rho_psi_norm", "a_xi_norm", "rho_xipsi_norm"],
        w.rows.iter().map(|r| vec![r.xi, r.a_norm, r.rho_psi_norm, r.a_xi_norm, r.rho_xipsi_norm]),
    )?;
    artifact(&dir, "decay.json", "decay", cfg, &report)?;
    let slopes: serde_json::Map<String, Value> =
        report.slopes.iter().map(|(k, e)| (format!("slope_{k}"), json!(e.fit.map(|f| f.slope)))).collect();
    Ok(json!({"preset": preset.name(), "slopes": slopes}))
}

pub fn cmd_decay(cfg: &RunConfig) -> Result<Value> {
    let d = &cfg.decay;
    let presets = selected(&d.preset)?;
    let b = solve_blasius_with(&cfg.blasius)?;
    let ss = build_self_similar(&b, &GridSpec::new(d.psi_max, d.cells))?;
    let results = fan_out(cfg, &presets, |p, dir| decay_one(cfg, &b, &ss, p, dir))?;
    Ok(if results.len() == 1 { results.into_iter().next().expect("one result") } else { json!(results) })
}

pub fn cmd_sharpness(cfg: &RunConfig) -> Result<Value> {
    let s = &cfg.sharpness;
    if s.station_count == 0 {
        return Err(ConfigError::new("invalid_override", "sharpness.station_count must be positive").into());
    }
    let b = solve_blasius_with(&cfg.blasius)?;
    let stations = log_stations(s.window.0, s.window.1, s.station_count);
    let rows = sharpness_family(&b, s.s, s.d, &stations)?;
    let slopes = fit_all(&rows, s.window);
    let out = ensure_dir(&cfg.out)?;
    let header = ["x", "norm_00", "norm_01", "norm_02", "norm_10"];
    write_table(&out.join("sharpness.csv"), &header, rows.iter().map(|r| vec![r.x, r.norm_00, r.norm_01, r.norm_02, r.norm_10]))?;
    artifact(&out, "sharpness.json", "sharpness", cfg, json!({"rows": rows, "slopes": slopes}))?;
    let summary: serde_json::Map<String, Value> =
        slopes.iter().map(|(k, e)| (format!("slope_{k}"), json!(e.fit.map(|f| f.slope)))).collect();
    Ok(Value::Object(summary))
}
