//! Physical-space diagnostics: reconstruction, error norms, decay fits,
//! barrier envelopes, weighted energy decay and the shifted-Blasius oracle.

mod barrier;
mod norms;
mod reconstruct;
mod sharpness;
mod weighted;

use std::collections::BTreeMap;

use serde::Serialize;

pub use barrier::{barrier_envelope, default_b_grid, fit_envelope, fit_m, Barrier, EnvelopeVerdict, SnapshotTightness, MARGIN, NOISE_FLOOR};
pub use norms::{error_norms, fit_decay, fit_decay_above, fit_line, predicted_slope, DecayFit, NormRow, FLOOR_FACTOR, MIN_STATIONS, PAIRS};
pub use reconstruct::{reconstruct, reference_at, PhysicalSlice, ReferencePoint};
pub use sharpness::{sharpness_family, SAMPLES};
pub use weighted::{weighted_decay, weighted_row, WeightedDecay, WeightedRow};

use crate::blasius::BlasiusProfile;
use crate::error::{Error, Result};
use crate::march::{march, MarchConfig, Trajectory};
use crate::mesh::{ingest_initial, OmegaField};
use crate::presets::Inflow;
use crate::similarity::SelfSimilarProfile;

pub const SCHEMA: u32 = 1;
/// Default fit window in `x`.
pub const WINDOW: (f64, f64) = (5.0, 50.0);

/// `count` stations spaced evenly in `ln(x + 1)` over `[lo, hi]`.
pub fn log_stations(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = ((lo + 1.0).ln(), (hi + 1.0).ln());
    (0..count)
        .map(|k| {
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 1.0 };
            (a + (b - a) * t).exp() - 1.0
        })
        .collect()
}

pub fn pair_key(pair: (u8, u8)) -> String {
    format!("{}{}", pair.0, pair.1)
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeEntry {
    pub predicted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SlopeEntry {
    fn from(pair: (u8, u8), r: Result<DecayFit>) -> Self {
        let predicted = predicted_slope(pair);
        match r {
            Ok(fit) => Self { predicted, fit: Some(fit), error: None },
            Err(e) => Self { predicted, fit: None, error: Some(format!("{}: {e}", e.code())) },
        }
    }
}

/// Slopes for every derivative pair over `window`.
pub fn fit_all(rows: &[NormRow], window: (f64, f64)) -> BTreeMap<String, SlopeEntry> {
    fit_all_above(rows, None, window)
}

/// As [`fit_all`], rejecting norms at the discretization floor.
pub fn fit_all_above(rows: &[NormRow], floor: Option<&[NormRow]>, window: (f64, f64)) -> BTreeMap<String, SlopeEntry> {
    PAIRS.iter().map(|&p| (pair_key(p), SlopeEntry::from(p, fit_decay_above(rows, floor, window, p)))).collect()
}

/// Reconstruction error of the exact steady state at station `x`: the
/// smallest norm the pipeline can resolve there.
pub fn discretization_floor(blasius: &BlasiusProfile, ss: &SelfSimilarProfile, x: f64) -> Result<NormRow> {
    let mut w = ss.wbar.clone();
    *w.last_mut().expect("grid has nodes") = 1.0;
    let field = OmegaField::new(ss.grid.clone(), w, (x + 1.0).ln(), 1.0)?;
    error_norms(&reconstruct(&field, ss)?, blasius)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub schema: u32,
    pub inflow: Inflow,
    pub d_shift: f64,
    pub window: (f64, f64),
    pub stations: Vec<f64>,
    pub norms: Vec<NormRow>,
    /// Norms of the reconstructed steady state at the same stations.
    pub floor: Vec<NormRow>,
    pub slopes: BTreeMap<String, SlopeEntry>,
    /// Closed-form `u_bar^s - u_bar` norms (shifted inflow only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_norms: Option<Vec<NormRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_slopes: Option<BTreeMap<String, SlopeEntry>>,
    pub barrier_fits: Vec<EnvelopeVerdict>,
    pub weighted_decay: WeightedDecay,
}

impl DecayReport {
    pub fn slope(&self, pair: (u8, u8)) -> Option<DecayFit> {
        self.slopes.get(&pair_key(pair)).and_then(|e| e.fit)
    }
}

/// Solve, reconstruct and fit for one inflow profile.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRun {
    pub inflow: Inflow,
    pub stations: Vec<f64>,
    pub window: (f64, f64),
    pub march: MarchConfig,
    pub barriers: Vec<Barrier>,
}

impl DecayRun {
    /// Stations evenly spaced in `ln(x+1)` over the window, marched at `dxi`.
    pub fn new(inflow: Inflow, d_shift: f64, dxi: f64, window: (f64, f64), count: usize) -> Self {
        let stations = log_stations(window.0, window.1, count);
        let xi_end = (stations.last().copied().unwrap_or(window.1) + d_shift).ln();
        Self {
            inflow,
            stations,
            window,
            march: MarchConfig::new(d_shift, xi_end, dxi),
            barriers: vec![Barrier::Phi1 { alpha: 0.5, mu: 0.1 }, Barrier::Phi2 { delta: 0.5, b: 0.0 }],
        }
    }
}

/// Runs the full pipeline; returns the report and the marched trajectory.
pub fn run_decay(blasius: &BlasiusProfile, ss: &SelfSimilarProfile, run: &DecayRun) -> Result<(DecayReport, OmegaField, Trajectory)> {
    if run.stations.is_empty() {
        return Err(Error::TooFewStations { need: MIN_STATIONS, got: 0 });
    }
    let d = run.march.d_shift;
    let init = ingest_initial(&run.inflow.profile(blasius)?, d, ss.grid.clone())?;
    let xis: Vec<f64> = run.stations.iter().map(|x| (x + d).ln()).collect();
    let mut cfg = run.march;
    cfg.xi_end = cfg.xi_end.max(*xis.last().unwrap());
    let traj = march(&init, ss, &cfg, &xis).map_err(|p| p.error)?;
    let mut rows = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        rows.push(error_norms(&reconstruct(snap, ss)?, blasius)?);
    }
    let floor = run.stations.iter().map(|&x| discretization_floor(blasius, ss, x)).collect::<Result<Vec<_>>>()?;
    let slopes = fit_all_above(&rows, Some(&floor), run.window);
    let (oracle_norms, oracle_slopes) = match run.inflow {
        Inflow::Shifted { s } if (s - 1.0).abs() > 0.0 => {
            let o = sharpness_family(blasius, s, 1.0, &run.stations)?;
            let f = fit_all(&o, run.window);
            (Some(o), Some(f))
        }
        _ => (None, None),
    };
    let mut all = vec![init.clone()];
    all.extend(traj.snapshots.iter().cloned());
    let barrier_fits = run.barriers.iter().map(|&b| fit_envelope(&all, ss, b, &default_b_grid())).collect();
    let weighted = weighted_decay(&traj.snapshots, ss)?;
    let report = DecayReport {
        schema: SCHEMA,
        inflow: run.inflow,
        d_shift: d,
        window: run.window,
        stations: run.stations.clone(),
        norms: rows,
        floor,
        slopes,
        oracle_norms,
        oracle_slopes,
        barrier_fits,
        weighted_decay: weighted,
    };
    Ok((report, init, traj))
}
