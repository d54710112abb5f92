use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of cells for a computational grid.
pub const MIN_CELLS: usize = 64;
/// Upper bound on the first spacing relative to `psi_max`.
pub const WALL_CLUSTERING: f64 = 1e-4;

/// Finite-difference weights anchored at `start`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    pub start: usize,
    pub len: usize,
    pub w: [f64; 4],
}

impl Stencil {
    #[inline]
    pub fn apply(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.w[k] * f[self.start + k];
        }
        acc
    }
}

/// Strictly increasing stream-coordinate nodes `0 = psi_0 < ... < psi_J`
/// with precomputed nonuniform difference stencils.
#[derive(Debug, Clone)]
pub struct PsiGrid {
    nodes: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
}

impl PsiGrid {
    /// Builds a grid from arbitrary strictly increasing nodes starting at 0.
    ///
    /// Only monotonicity is enforced here; the wall-clustering invariants of
    /// the marching grids are checked by [`GridSpec::build`].
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 4 {
            return Err(Error::invalid("nodes", "need at least 4 nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid("nodes", "first node must be psi = 0"));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::NonMonotone { at: w[0] });
        }
        let n = nodes.len();
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            let (s1, l1) = if i == 0 {
                (0, 3)
            } else if i == n - 1 {
                (n - 3, 3)
            } else {
                (i - 1, 3)
            };
            let (s2, l2) = if i == 0 {
                (0, 4)
            } else if i == n - 1 {
                (n - 4, 4)
            } else {
                (i - 1, 3)
            };
            d1.push(stencil(&nodes, i, s1, l1, 1));
            d2.push(stencil(&nodes, i, s2, l2, 2));
        }
        Ok(Self { nodes, d1, d2 })
    }

    /// Uniform grid on `[0, psi_max]` with `cells` cells.
    pub fn uniform(psi_max: f64, cells: usize) -> Result<Self> {
        Self::new((0..=cells).map(|i| psi_max * i as f64 / cells as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of cells `J` (nodes are indexed `0..=J`).
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn psi_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spacing(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    /// Dual-cell width used by nodal (lumped) quadrature.
    pub fn dual_width(&self, i: usize) -> f64 {
        let n = self.nodes.len();
        let left = if i > 0 { self.spacing(i - 1) } else { 0.0 };
        let right = if i + 1 < n { self.spacing(i) } else { 0.0 };
        0.5 * (left + right)
    }

    /// Cell midpoints `(psi_k + psi_{k+1}) / 2`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub(crate) fn d1_stencil(&self, i: usize) -> &Stencil {
        &self.d1[i]
    }

    pub(crate) fn d2_stencil(&self, i: usize) -> &Stencil {
        &self.d2[i]
    }

    /// Checks the invariants required of marching grids.
    pub fn check_clustering(&self) -> Result<()> {
        if self.cells() < MIN_CELLS {
            return Err(Error::invalid("J", format!("need J >= {MIN_CELLS}, got {}", self.cells())));
        }
        let first = self.spacing(0);
        if first > WALL_CLUSTERING * self.psi_max() * (1.0 + 1e-9) {
            return Err(Error::invalid(
                "stretch_ratio",
                format!("first spacing {first:.3e} exceeds psi_max * {WALL_CLUSTERING:.0e}"),
            ));
        }
        Ok(())
    }
}

// Fornberg's recursion for the derivative weights of order `m` at `nodes[at]`.
fn stencil(nodes: &[f64], at: usize, start: usize, len: usize, m: usize) -> Stencil {
    let z = nodes[at];
    let x = &nodes[start..start + len];
    let n = len - 1;
    let mut c = [[0.0f64; 3]; 4]; // c[node][derivative]
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..=n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    let mut w = [0.0; 4];
    for j in 0..=n {
        w[j] = c[j][m];
    }
    Stencil { start, len, w }
}

/// Grid description as it appears in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub psi_max: f64,
    /// Number of cells `J`.
    pub cells: usize,
    /// Ratio of the last to the first cell width. `None` picks the grading
    /// that puts the first spacing at `psi_max * 1e-4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stretch_ratio: Option<f64>,
}

impl GridSpec {
    pub fn new(psi_max: f64, cells: usize) -> Self {
        Self { psi_max, cells, stretch_ratio: None }
    }

    pub fn with_stretch(mut self, ratio: f64) -> Self {
        self.stretch_ratio = Some(ratio);
        self
    }

    /// Total grading that places the first spacing at `fraction * psi_max`.
    pub fn stretch_for_first_fraction(cells: usize, fraction: f64) -> f64 {
        let frac = |ln_s: f64| {
            let r = (ln_s / (cells as f64 - 1.0)).exp();
            if (r - 1.0).abs() < 1e-15 {
                1.0 / cells as f64
            } else {
                (r - 1.0) / (r.powi(cells as i32) - 1.0)
            }
        };
        if frac(0.0) <= fraction {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0f64, 60.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if frac(mid) > fraction {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    }

    /// Geometric grid clustered at the wall.
    pub fn build(&self) -> Result<PsiGrid> {
        if !(self.psi_max > 0.0) {
            return Err(Error::invalid("psi_max", "must be positive"));
        }
        if self.cells < MIN_CELLS {
            return Err(Error::invalid("J", format!("need J >= {MIN_CELLS}, got {}", self.cells)));
        }
        let stretch = self
            .stretch_ratio
            .unwrap_or_else(|| Self::stretch_for_first_fraction(self.cells, WALL_CLUSTERING));
        if !(stretch >= 1.0) {
            return Err(Error::invalid("stretch_ratio", "must be >= 1"));
        }
        let j = self.cells;
        let r = stretch.powf(1.0 / (j as f64 - 1.0));
        let mut nodes = Vec::with_capacity(j + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        let mut h = 1.0;
        for _ in 0..j {
            acc += h;
            nodes.push(acc);
            h *= r;
        }
        let scale = self.psi_max / acc;
        for v in nodes.iter_mut() {
            *v *= scale;
        }
        nodes[j] = self.psi_max;
        let grid = PsiGrid::new(nodes)?;
        grid.check_clustering()?;
        Ok(grid)
    }
}
