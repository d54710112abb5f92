use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant maps to a stable machine-readable code via [`Error::code`],
/// which the CLI forwards into its JSON diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shooting bracket [{lo}, {hi}] does not straddle the target (residuals {g_lo:.3e}, {g_hi:.3e})")]
    NoBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("shooting map is not monotone at s = {s}")]
    NonMonotoneShooting { s: f64 },

    #[error("{what} did not converge after {iters} iterations (last change {last:.3e})")]
    NoConvergence { what: &'static str, iters: usize, last: f64 },

    #[error("ODE residual {residual:.3e} exceeds {tol:.1e}; reduce the step")]
    StepTooLarge { residual: f64, tol: f64 },

    #[error("1 - f' underflows inside the fit window at z = {z}")]
    Underflow { z: f64 },

    #[error("stream coordinate is not strictly increasing near {at}")]
    NonMonotone { at: f64 },

    #[error("initial stream function is not strictly increasing near y = {y}")]
    NonMonotoneStream { y: f64 },

    #[error("argument {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("tridiagonal system is singular at row {row}")]
    SolveFailed { row: usize },

    #[error("operator coefficient `{what}` is not finite at node {node}")]
    BadProfile { what: &'static str, node: usize },

    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error("wall slope {slope:.3e} is not positive; the von Mises map cannot be inverted")]
    DegenerateWall { slope: f64 },

    #[error("slice and reference do not share a y-range: {reason}")]
    RangeMismatch { reason: String },

    #[error("need at least {need} stations in the fit window, got {got}")]
    TooFewStations { need: usize, got: usize },

    #[error("norms reach the discretization floor inside the fit window: {reason}")]
    NoisyFloor { reason: String },

    #[error("structural guard `{guard}` failed at xi = {xi}: {detail}")]
    GuardViolation { guard: &'static str, xi: f64, detail: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NoBracket { .. } => "no_bracket",
            Error::NonMonotoneShooting { .. } => "non_monotone_shooting",
            Error::NoConvergence { .. } => "no_convergence",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::Underflow { .. } => "underflow",
            Error::NonMonotone { .. } => "non_monotone",
            Error::NonMonotoneStream { .. } => "non_monotone_stream",
            Error::OutOfRange { .. } => "out_of_range",
            Error::SolveFailed { .. } => "solve_failed",
            Error::BadProfile { .. } => "bad_profile",
            Error::ZeroVector => "zero_vector",
            Error::DegenerateWall { .. } => "degenerate_wall",
            Error::RangeMismatch { .. } => "range_mismatch",
            Error::TooFewStations { .. } => "too_few_stations",
            Error::NoisyFloor { .. } => "noisy_floor",
            Error::GuardViolation { .. } => "guard_violation",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
