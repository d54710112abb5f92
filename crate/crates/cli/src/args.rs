//! Command-line surface; flags override the config file.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use prandtl_core::march::Scheme;
use prandtl_core::presets::Inflow;
use serde_json::Value;

use crate::commands;
use crate::config::{ConfigError, Preset, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "prandtl", version, about = "Steady Prandtl boundary-layer experiments")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Initial-profile preset (`shifted_s4`, `tanh`, `erf`, `sine_w3`, `equilibrium`, or `all`).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print the resolved configuration in canonical form and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Blasius problem and fit its far field.
    Blasius(BlasiusArgs),
    /// Principal eigenpair of the linearized operator.
    Eigen(EigenArgs),
    /// March an initial profile with structural guards.
    Solve(SolveArgs),
    /// Solve, reconstruct and fit decay rates.
    Decay(DecayArgs),
    /// Closed-form norms of the shifted Blasius family.
    Sharpness(SharpnessArgs),
}

#[derive(Debug, Args)]
pub struct BlasiusArgs {
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub shoot_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub psi_max: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated resolutions for the refinement study.
    #[arg(long, value_delimiter = ',')]
    pub refine: Option<Vec<usize>>,
    #[arg(long)]
    pub battery: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    BackwardEuler,
    CrankNicolson,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub psi_max: Option<f64>,
    #[arg(long)]
    pub d_shift: Option<f64>,
    #[arg(long)]
    pub dxi: Option<f64>,
    #[arg(long)]
    pub xi_end: Option<f64>,
    #[arg(long)]
    pub stations: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Abort on the first failed guard.
    #[arg(long)]
    pub fatal_guards: bool,
    /// Enable the concavity guard.
    #[arg(long)]
    pub concavity_guard: bool,
    /// Tabulated `y,u` inflow with a header row.
    #[arg(long)]
    pub inflow_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub psi_max: Option<f64>,
    #[arg(long)]
    pub d_shift: Option<f64>,
    #[arg(long)]
    pub dxi: Option<f64>,
    #[arg(long)]
    pub window_lo: Option<f64>,
    #[arg(long)]
    pub window_hi: Option<f64>,
    /// Number of stations in the window.
    #[arg(long)]
    pub stations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub window_lo: Option<f64>,
    #[arg(long)]
    pub window_hi: Option<f64>,
    #[arg(long)]
    pub stations: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn preset_not_applicable(cmd: &str) -> ConfigError {
    ConfigError::new("invalid_override", format!("--preset does not apply to `{cmd}`"))
}

/// Config file, then global flags, then subcommand flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.out, cli.out.clone());
    set(&mut cfg.seed, cli.seed);
    if i64::try_from(cfg.seed).is_err() {
        return Err(ConfigError::new("invalid_parameter", format!("seed {} exceeds {}", cfg.seed, i64::MAX)));
    }
    set(&mut cfg.workers, cli.workers);
    let preset = cli.preset.clone();
    match &cli.command {
        Command::Blasius(a) => {
            if preset.is_some() {
                return Err(preset_not_applicable("blasius"));
            }
            set(&mut cfg.blasius.z_max, a.z_max);
            set(&mut cfg.blasius.step, a.step);
            set(&mut cfg.blasius.shoot_tol, a.shoot_tol);
            set(&mut cfg.blasius.residual_tol, a.residual_tol);
        }
        Command::Eigen(a) => {
            if preset.is_some() {
                return Err(preset_not_applicable("eigen"));
            }
            let e = &mut cfg.eigen;
            set(&mut e.cells, a.cells);
            if a.psi_max.is_some() {
                e.psi_max = a.psi_max;
            }
            set(&mut e.tail_tol, a.tail_tol);
            set(&mut e.tol, a.tol);
            set(&mut e.refine, a.refine.clone());
            set(&mut e.battery, a.battery);
        }
        Command::Solve(a) => {
            let s = &mut cfg.solve;
            set(&mut s.preset, preset);
            set(&mut s.cells, a.cells);
            set(&mut s.psi_max, a.psi_max);
            set(&mut s.d_shift, a.d_shift);
            set(&mut s.dxi, a.dxi);
            set(&mut s.xi_end, a.xi_end);
            set(&mut s.stations, a.stations);
            if let Some(sch) = a.scheme {
                s.scheme = match sch {
                    SchemeArg::BackwardEuler => Scheme::BackwardEuler,
                    SchemeArg::CrankNicolson => Scheme::CrankNicolson,
                };
            }
            s.guards.fatal |= a.fatal_guards;
            s.guards.concavity |= a.concavity_guard;
            if a.inflow_csv.is_some() {
                s.inflow_csv = a.inflow_csv.clone();
            }
        }
        Command::Decay(a) => {
            let d = &mut cfg.decay;
            set(&mut d.preset, preset);
            set(&mut d.cells, a.cells);
            set(&mut d.psi_max, a.psi_max);
            set(&mut d.d_shift, a.d_shift);
            set(&mut d.dxi, a.dxi);
            set(&mut d.window.0, a.window_lo);
            set(&mut d.window.1, a.window_hi);
            if let Some(n) = a.stations {
                d.station_count = n;
                d.stations = None;
            }
        }
        Command::Sharpness(a) => {
            let s = &mut cfg.sharpness;
            if let Some(name) = preset {
                match Preset::parse(&name)? {
                    Preset::Inflow(Inflow::Shifted { s: shift }) => s.s = shift,
                    _ => return Err(ConfigError::new("invalid_override", "sharpness takes a shifted_s<value> preset")),
                }
            }
            set(&mut s.s, a.s);
            set(&mut s.d, a.d);
            set(&mut s.window.0, a.window_lo);
            set(&mut s.window.1, a.window_hi);
            set(&mut s.station_count, a.stations);
        }
    }
    Ok(cfg)
}

/// Resolves the configuration and runs the subcommand.
pub fn run(cli: Cli) -> Result<Value> {
    let cfg = resolve(&cli)?;
    if cli.print_config {
        print!("{}", cfg.canonical()?);
        return Ok(Value::Null);
    }
    match cli.command {
        Command::Blasius(_) => commands::cmd_blasius(&cfg),
        Command::Eigen(_) => commands::cmd_eigen(&cfg),
        Command::Solve(_) => commands::cmd_solve(&cfg),
        Command::Decay(_) => commands::cmd_decay(&cfg),
        Command::Sharpness(_) => commands::cmd_sharpness(&cfg),
    }
}
