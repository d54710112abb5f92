//! Thomas algorithm for tridiagonal systems.
//!
//! Row `i` reads `lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1] = rhs[i]`;
//! `lower[0]` and `upper[n-1]` are ignored.

use crate::error::{Error, Result};

/// Solves the system in place, overwriting `rhs` with the solution.
///
/// No pivoting is done; callers assemble diagonally dominant or symmetric
/// positive definite matrices.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n, "tridiagonal shape mismatch");
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::SolveFailed { row: 0 });
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SolveFailed { row: i });
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Returns `true` when every row satisfies `|diag| >= |lower| + |upper|`.
pub fn is_diagonally_dominant(lower: &[f64], diag: &[f64], upper: &[f64]) -> bool {
    let n = diag.len();
    (0..n).all(|i| {
        let l = if i > 0 { lower[i].abs() } else { 0.0 };
        let u = if i + 1 < n { upper[i].abs() } else { 0.0 };
        diag[i].abs() >= l + u
    })
}

/// Computes `A x` for the tridiagonal matrix.
pub fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * x[i];
            if i > 0 {
                acc += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += upper[i] * x[i + 1];
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_dominant_system() {
        let n = 50;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.002 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + (i as f64).sin()).collect();
        let x: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
        let mut b = apply(&lower, &diag, &upper, &x);
        solve_in_place(&lower, &diag, &upper, &mut b).unwrap();
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut b = vec![1.0, 1.0];
        let err = solve_in_place(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut b).unwrap_err();
        assert!(matches!(err, Error::SolveFailed { row: 0 }));
    }
}
