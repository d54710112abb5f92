//! Fixtures shared by the benchmarks.

use prandtl_core::presets::Inflow;
use prandtl_core::similarity::{build_self_similar, psi_max_for_tail, SelfSimilarProfile, TAIL_TOL};
use prandtl_core::{ingest_initial, solve_blasius, BlasiusProfile, GridSpec, OmegaField};

pub fn blasius() -> BlasiusProfile {
    solve_blasius(10.0, 1e-3, 1e-10).expect("default Blasius solve")
}

/// Profile on the tail-chosen truncation used by the eigenproblem.
pub fn eigen_profile(b: &BlasiusProfile, cells: usize) -> SelfSimilarProfile {
    let psi_max = psi_max_for_tail(b, TAIL_TOL).expect("tail truncation");
    build_self_similar(b, &GridSpec::new(psi_max, cells)).expect("self-similar profile")
}

/// Profile and shifted inflow on the marching truncation.
pub fn march_setup(b: &BlasiusProfile, cells: usize, s: f64) -> (SelfSimilarProfile, OmegaField) {
    let ss = build_self_similar(b, &GridSpec::new(12.0, cells)).expect("self-similar profile");
    let init = ingest_initial(&Inflow::Shifted { s }.profile(b).expect("preset"), 1.0, ss.grid.clone()).expect("ingest");
    (ss, init)
}
