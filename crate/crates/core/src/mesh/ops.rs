//! Difference and quadrature operators on a [`PsiGrid`].

use serde::{Deserialize, Serialize};

use super::grid::PsiGrid;

/// First derivative by nonuniform three-point stencils (one-sided at the ends).
pub fn d1(values: &[f64], grid: &PsiGrid) -> Vec<f64> {
    assert_eq!(values.len(), grid.len(), "field/grid length mismatch");
    (0..grid.len()).map(|i| grid.d1_stencil(i).apply(values)).collect()
}

/// Second derivative: three-point in the interior, four-point one-sided at the ends.
pub fn d2(values: &[f64], grid: &PsiGrid) -> Vec<f64> {
    assert_eq!(values.len(), grid.len(), "field/grid length mismatch");
    (0..grid.len()).map(|i| grid.d2_stencil(i).apply(values)).collect()
}

/// Composite trapezoid rule of nodal values.
pub fn trapezoid(values: &[f64], grid: &PsiGrid) -> f64 {
    assert_eq!(values.len(), grid.len(), "field/grid length mismatch");
    let x = grid.nodes();
    values
        .windows(2)
        .zip(x.windows(2))
        .map(|(v, x)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
        .sum()
}

/// Running trapezoid integral from `xs[0]`; first entry is zero.
pub fn cumulative_trapezoid(xs: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), values.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..xs.len() {
        acc += 0.5 * (values[k - 1] + values[k]) * (xs[k] - xs[k - 1]);
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// Unweighted maximum norm. The weight argument is ignored.
    Linf,
    /// `sqrt(int weight * value^2)` by the trapezoid rule.
    L2,
}

/// Weighted norm of a nodal field.
///
/// `Linf` ignores the weight: the sup-norms in the decay estimates are unweighted.
pub fn weighted_norm(values: &[f64], weight: &[f64], grid: &PsiGrid, kind: NormKind) -> f64 {
    match kind {
        NormKind::Linf => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        NormKind::L2 => {
            assert_eq!(weight.len(), values.len());
            debug_assert!(weight.iter().all(|w| *w >= 0.0));
            let integrand: Vec<f64> = values.iter().zip(weight).map(|(v, w)| w * v * v).collect();
            trapezoid(&integrand, grid).max(0.0).sqrt()
        }
    }
}
