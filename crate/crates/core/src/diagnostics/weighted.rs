//! Weighted energy norms of `omega_tilde = omega - omega_bar` and their exponential rates.

use serde::Serialize;

use super::norms::{fit_line, DecayFit};
use crate::error::Result;
use crate::march::Marcher;
use crate::mesh::{d1, weighted_norm, NormKind, OmegaField};
use crate::similarity::SelfSimilarProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedRow {
    pub xi: f64,
    /// `|| sqrt(A) omega_tilde ||`
    pub a_norm: f64,
    /// `|| sqrt(rho) omega_tilde_psi ||`
    pub rho_psi_norm: f64,
    /// `|| sqrt(A) omega_tilde_xi ||`
    pub a_xi_norm: f64,
    /// `|| sqrt(rho) omega_tilde_xipsi ||`
    pub rho_xipsi_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedDecay {
    pub rows: Vec<WeightedRow>,
    /// Fitted rates per unit `xi`; `None` when the norms vanish.
    pub a_rate: Option<DecayFit>,
    pub rho_psi_rate: Option<DecayFit>,
    pub a_xi_rate: Option<DecayFit>,
    pub rho_xipsi_rate: Option<DecayFit>,
}

/// Norms of one snapshot. `A` vanishes at the wall node, where `omega_tilde` does too.
pub fn weighted_row(field: &OmegaField, ss: &SelfSimilarProfile, marcher: &Marcher) -> WeightedRow {
    let g = &field.grid;
    let tilde: Vec<f64> = field.values.iter().zip(&ss.wbar).map(|(a, b)| a - b).collect();
    let rate = marcher.rate(&field.values);
    let norm = |v: &[f64], w: &[f64]| weighted_norm(v, w, g, NormKind::L2);
    WeightedRow {
        xi: field.xi,
        a_norm: norm(&tilde, &ss.a_weight),
        rho_psi_norm: norm(&d1(&tilde, g), &ss.rho),
        a_xi_norm: norm(&rate, &ss.a_weight),
        rho_xipsi_norm: norm(&d1(&rate, g), &ss.rho),
    }
}

fn rate_fit(xi: &[f64], v: &[f64]) -> Result<Option<DecayFit>> {
    if v.iter().all(|&x| x == 0.0) {
        return Ok(None);
    }
    let keep: Vec<usize> = (0..v.len()).filter(|&k| v[k] > 0.0).collect();
    let t: Vec<f64> = keep.iter().map(|&k| xi[k]).collect();
    let y: Vec<f64> = keep.iter().map(|&k| v[k]).collect();
    fit_line(&t, &y).map(Some)
}

/// Norm table over the snapshots and exponential rates fitted against `xi`.
pub fn weighted_decay(snapshots: &[OmegaField], ss: &SelfSimilarProfile) -> Result<WeightedDecay> {
    let marcher = Marcher::new(ss);
    let rows: Vec<WeightedRow> = snapshots.iter().map(|f| weighted_row(f, ss, &marcher)).collect();
    let xi: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let col = |f: fn(&WeightedRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(WeightedDecay {
        a_rate: rate_fit(&xi, &col(|r| r.a_norm))?,
        rho_psi_rate: rate_fit(&xi, &col(|r| r.rho_psi_norm))?,
        a_xi_rate: rate_fit(&xi, &col(|r| r.a_xi_norm))?,
        rho_xipsi_rate: rate_fit(&xi, &col(|r| r.rho_xipsi_norm))?,
        rows,
    })
}
