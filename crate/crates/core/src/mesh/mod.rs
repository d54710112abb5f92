//! Computational psi-grid, nodal fields and their difference/quadrature operators.

mod field;
mod grid;
mod ops;

pub use field::{ingest_initial, InitialProfile, OmegaField};
pub use grid::{GridSpec, PsiGrid, MIN_CELLS, WALL_CLUSTERING};
pub use ops::{cumulative_trapezoid, d1, d2, trapezoid, weighted_norm, NormKind};
