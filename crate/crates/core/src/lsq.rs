//! Small dense least-squares fits used by the far-field and decay fits.

/// Ordinary least squares for `y ~ sum_k c_k * basis_k(x)`.
///
/// Returns the coefficients and the residual vector. Solves the normal
/// equations by Gaussian elimination with partial pivoting, which is ample
/// for the two- and three-term fits done here.
pub fn fit(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = rows.first()?.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += r[i] * r[j];
            }
            a[i][m] += r[i] * yi;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..m {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..=m {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    let resid = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| yi - r.iter().zip(&coef).map(|(b, c)| b * c).sum::<f64>())
        .collect();
    Some((coef, resid))
}

/// Straight-line fit `y = a + b x`: returns `(a, b, standard error of b, r^2)`.
pub fn line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let se = (sse / (n as f64 - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Some((a, b, se, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_coefficients() {
        let xs: Vec<f64> = (1..30).map(|i| i as f64 * 0.3).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, -x.ln(), -x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 0.5 - 1.0 * x.ln() + 2.0 * x).collect();
        let (c, r) = fit(&rows, &y).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-10 && (c[1] - 1.0).abs() < 1e-10 && (c[2] + 2.0).abs() < 1e-10);
        assert!(r.iter().all(|v| v.abs() < 1e-10));
        let (a, b, se, r2) = line(&xs, &xs.iter().map(|x| 1.0 - 3.0 * x).collect::<Vec<_>>()).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b + 3.0).abs() < 1e-12 && se < 1e-10 && r2 > 0.999_999);
    }
}
