//! Numerical laboratory for the steady, pressure-free Prandtl boundary layer.
//!
//! The pipeline is: solve the Blasius problem ([`blasius`]), map it to the
//! self-similar profile in modified von Mises variables ([`similarity`]),
//! march the degenerate parabolic equation
//! `omega_xi = sqrt(omega) omega_psipsi + psi omega_psi / 2` ([`march`]),
//! study the linearized operator about the Blasius state ([`spectral`]) and
//! measure convergence rates back in physical variables ([`diagnostics`]).

pub mod blasius;
pub mod diagnostics;
pub mod error;
pub mod interp;
pub mod lsq;
pub mod march;
pub mod mesh;
pub mod presets;
pub mod similarity;
pub mod spectral;
pub mod tridiag;

pub use blasius::{fit_far_field, solve_blasius, solve_blasius_with, BlasiusConfig, BlasiusProfile, FarField};
pub use error::{Error, Result};
pub use mesh::{ingest_initial, GridSpec, InitialProfile, NormKind, OmegaField, PsiGrid};
