//! Comparison-function envelopes for `|omega - omega_bar|`.
//!
//! ```text
//! phi1 = M exp(-alpha t) exp(-mu psi^2) omega_bar
//! phi2 = M exp(B (1 - exp(-delta t))) exp(-t) psi omega_bar'
//! ```
//!
//! with `t = xi - xi0`. `M` is fitted at the first snapshot as the smallest
//! constant that bounds the error there, times a 1.1 margin.

use serde::{Deserialize, Serialize};

use crate::mesh::OmegaField;
use crate::similarity::SelfSimilarProfile;

/// Margin applied to the fitted `M`.
pub const MARGIN: f64 = 1.1;
/// Errors below this are treated as zero when forming ratios.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Barrier {
    Phi1 { alpha: f64, mu: f64 },
    Phi2 { delta: f64, b: f64 },
}

impl Barrier {
    /// Envelope shape at node `j` and elapsed `t`, without the constant `M`.
    pub fn shape(&self, ss: &SelfSimilarProfile, j: usize, t: f64) -> f64 {
        let psi = ss.psi()[j];
        match *self {
            Barrier::Phi1 { alpha, mu } => (-alpha * t).exp() * (-mu * psi * psi).exp() * ss.wbar[j],
            Barrier::Phi2 { delta, b } => (b * (1.0 - (-delta * t).exp())).exp() * (-t).exp() * psi * ss.wbar_p[j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotTightness {
    pub xi: f64,
    /// `sup |omega - omega_bar| / phi`.
    pub tightness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeVerdict {
    pub barrier: Barrier,
    pub m: f64,
    pub holds: bool,
    /// `(xi, psi)` of the first node where the envelope fails.
    pub first_violation: Option<(f64, f64)>,
    pub per_snapshot: Vec<SnapshotTightness>,
}

fn ratio_sup(field: &OmegaField, ss: &SelfSimilarProfile, barrier: &Barrier, t: f64) -> (f64, Option<usize>) {
    let n = field.values.len();
    let mut sup = 0.0f64;
    let mut arg = None;
    for j in 1..n - 1 {
        let err = (field.values[j] - ss.wbar[j]).abs();
        if err <= NOISE_FLOOR {
            continue;
        }
        let r = err / barrier.shape(ss, j, t);
        if r > sup || r.is_nan() {
            sup = if r.is_nan() { f64::INFINITY } else { r };
            arg = Some(j);
        }
    }
    (sup, arg)
}

/// Smallest admissible `M` at the first snapshot, with the 1.1 margin.
pub fn fit_m(snapshots: &[OmegaField], ss: &SelfSimilarProfile, barrier: &Barrier) -> f64 {
    snapshots.first().map(|f| MARGIN * ratio_sup(f, ss, barrier, 0.0).0).unwrap_or(0.0)
}

/// Checks `|omega - omega_bar| <= M shape` at every snapshot node.
pub fn barrier_envelope(snapshots: &[OmegaField], ss: &SelfSimilarProfile, barrier: Barrier, m: f64) -> EnvelopeVerdict {
    let xi0 = snapshots.first().map(|f| f.xi).unwrap_or(0.0);
    let mut per = Vec::with_capacity(snapshots.len());
    let mut first = None;
    for f in snapshots {
        let (sup, arg) = ratio_sup(f, ss, &barrier, f.xi - xi0);
        let tightness = if m > 0.0 { sup / m } else if sup > 0.0 { f64::INFINITY } else { 0.0 };
        if tightness > 1.0 && first.is_none() {
            first = arg.map(|j| (f.xi, ss.psi()[j]));
        }
        per.push(SnapshotTightness { xi: f.xi, tightness });
    }
    EnvelopeVerdict { barrier, m, holds: first.is_none(), first_violation: first, per_snapshot: per }
}

/// Fits `M` and, for `phi2`, the smallest `B` on `b_grid` for which the envelope holds.
pub fn fit_envelope(snapshots: &[OmegaField], ss: &SelfSimilarProfile, barrier: Barrier, b_grid: &[f64]) -> EnvelopeVerdict {
    match barrier {
        Barrier::Phi1 { .. } => barrier_envelope(snapshots, ss, barrier, fit_m(snapshots, ss, &barrier)),
        Barrier::Phi2 { delta, .. } => {
            let mut last = None;
            for &b in b_grid {
                let cand = Barrier::Phi2 { delta, b };
                let verdict = barrier_envelope(snapshots, ss, cand, fit_m(snapshots, ss, &cand));
                if verdict.holds {
                    return verdict;
                }
                last = Some(verdict);
            }
            last.unwrap_or_else(|| barrier_envelope(snapshots, ss, barrier, fit_m(snapshots, ss, &barrier)))
        }
    }
}

/// Default search grid for `B`.
pub fn default_b_grid() -> Vec<f64> {
    (0..=200).map(|k| 0.05 * k as f64).collect()
}
