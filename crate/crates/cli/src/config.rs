//! Run configuration: TOML sections per subcommand, with defaults for every field.

use std::fmt;
use std::path::{Path, PathBuf};

use prandtl_core::march::{GuardFlags, Scheme};
use prandtl_core::presets::Inflow;
use prandtl_core::BlasiusConfig;
use serde::{Deserialize, Serialize};

/// Problems with the configuration or the command line; exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub code: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the randomized test-vector batteries.
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads for preset sweeps and refinement studies.
    pub workers: usize,
    pub blasius: BlasiusConfig,
    pub eigen: EigenSection,
    pub solve: SolveSection,
    pub decay: DecaySection,
    pub sharpness: SharpnessSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            out: PathBuf::from("out"),
            workers: 4,
            blasius: BlasiusConfig::default(),
            eigen: EigenSection::default(),
            solve: SolveSection::default(),
            decay: DecaySection::default(),
            sharpness: SharpnessSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSection {
    pub cells: usize,
    /// Truncation; chosen from `tail_tol` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_max: Option<f64>,
    pub tail_tol: f64,
    pub tol: f64,
    /// Resolutions of the refinement study.
    pub refine: Vec<usize>,
    /// Size of the random coercivity battery.
    pub battery: usize,
}

impl Default for EigenSection {
    fn default() -> Self {
        Self { cells: 1024, psi_max: None, tail_tol: 1e-3, tol: 1e-10, refine: vec![64, 128, 256, 512, 1024], battery: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub preset: String,
    /// Tabulated `y,u` inflow; replaces `preset` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inflow_csv: Option<PathBuf>,
    pub d_shift: f64,
    pub psi_max: f64,
    pub cells: usize,
    pub dxi: f64,
    pub xi_end: f64,
    /// Snapshots evenly spaced in `xi`.
    pub stations: usize,
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub concavity_tol: f64,
    pub guards: GuardFlags,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            preset: "shifted_s4".into(),
            inflow_csv: None,
            d_shift: 1.0,
            psi_max: 12.0,
            cells: 512,
            dxi: 1e-2,
            xi_end: 2.0,
            stations: 10,
            scheme: Scheme::CrankNicolson,
            picard_tol: 1e-6,
            concavity_tol: 1e-6,
            guards: GuardFlags::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub preset: String,
    pub d_shift: f64,
    pub psi_max: f64,
    pub cells: usize,
    pub dxi: f64,
    pub window: (f64, f64),
    /// Stations evenly spaced in `ln(x+1)` over the window.
    pub station_count: usize,
    /// Explicit stations; replaces `station_count` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stations: Option<Vec<f64>>,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            preset: "shifted_s4".into(),
            d_shift: 1.0,
            psi_max: 12.0,
            cells: 512,
            dxi: 1e-2,
            window: (5.0, 50.0),
            station_count: 12,
            stations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessSection {
    pub s: f64,
    pub d: f64,
    pub window: (f64, f64),
    pub station_count: usize,
}

impl Default for SharpnessSection {
    fn default() -> Self {
        Self { s: 4.0, d: 1.0, window: (10.0, 200.0), station_count: 12 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("config_parse", format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config_read", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML; parsing it back yields the same bytes.
    pub fn canonical(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::new("invalid_parameter", format!("config cannot be written as TOML: {e}")))
    }
}

/// Named initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// The self-similar profile itself.
    Equilibrium,
    Inflow(Inflow),
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::new("unknown_preset", format!("unknown preset `{name}`"));
        let num = |rest: &str| rest.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite()).ok_or_else(bad);
        match name {
            "equilibrium" => Ok(Preset::Equilibrium),
            "tanh" => Ok(Preset::Inflow(Inflow::Tanh)),
            "erf" => Ok(Preset::Inflow(Inflow::Erf)),
            _ => {
                if let Some(rest) = name.strip_prefix("shifted_s") {
                    Ok(Preset::Inflow(Inflow::Shifted { s: num(rest)? }))
                } else if let Some(rest) = name.strip_prefix("sine_w") {
                    Ok(Preset::Inflow(Inflow::Sine { width: num(rest)? }))
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Preset::Equilibrium => "equilibrium".into(),
            Preset::Inflow(i) => i.name(),
        }
    }

    /// The presets run by `--preset all`.
    pub fn sweep() -> Vec<Preset> {
        Inflow::battery().into_iter().map(Preset::Inflow).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = c.canonical().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.canonical().unwrap(), text);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c = RunConfig::parse("seed = 3\n[eigen]\ncells = 64\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.eigen.cells, 64);
        assert_eq!(c.eigen.tail_tol, 1e-3);
        assert_eq!(c.blasius, BlasiusConfig::default());
    }

    #[test]
    fn oversized_seed_is_an_error() {
        let c = RunConfig { seed: u64::MAX, ..RunConfig::default() };
        assert_eq!(c.canonical().unwrap_err().code, "invalid_parameter");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::parse("[eigen]\ncellz = 64\n").unwrap_err();
        assert_eq!(e.code, "config_parse");
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::sweep().into_iter().chain([Preset::Equilibrium]) {
            assert_eq!(Preset::parse(&p.name()).unwrap(), p);
        }
        assert!(Preset::parse("shifted_s-1").is_err());
        assert!(Preset::parse("gaussian").is_err());
    }
}
