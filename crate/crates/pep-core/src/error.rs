//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong, split between numerical failures and
/// physics-regime violations.  The distinction matters to callers: a regime
/// error means the requested quantity does not exist for those parameters
/// (no steady state, undefined normalization, ...), while a numerical error
/// means the computation itself broke down.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("eigensolver failed to converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },

    #[error("step size underflow at t = {last_t:.6e}; problem too stiff for this integrator")]
    StepUnderflow { last_t: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for {n_levels} levels")]
    Range { index: usize, n_levels: usize },

    #[error("no steady state: drive {omega:.6} >= critical amplitude {omega_c:.6}")]
    NoSteadyState { omega: f64, omega_c: f64 },

    #[error("value unbounded: |{value:.3e}| exceeds cap {cap:.1e}")]
    Unbounded { value: f64, cap: f64 },

    #[error("truncation {n} exceeds capacity cap {cap} (superoperator would be {dim}x{dim})")]
    Capacity { n: usize, cap: usize, dim: usize },

    #[error("truncation breached at t = {t:.4}: population {population:.3} > 0.5*N = {limit:.1}")]
    TruncationBreach { t: f64, population: f64, limit: f64 },

    #[error("degenerate steady-state space: null vectors are not unique")]
    DegenerateSteadyState,

    #[error("tau window too short: correlator tail is {tail_fraction:.3e} of its peak (> 1e-8)")]
    Windowing { tail_fraction: f64 },

    #[error("phase-space grid too coarse: Husimi normalization {integral:.6} off by more than 1e-2")]
    Resolution { integral: f64 },

    #[error("gap minimum for N = {n_levels} sits on the grid boundary; extend the omega grid")]
    GridBoundary { n_levels: usize },

    #[error("normalization undefined: {0}")]
    UndefinedNormalization(String),

    #[error("physicality violated: {0}")]
    Physicality(String),
}

impl Error {
    /// True for errors that report a physics-regime violation rather than a
    /// numerical breakdown.  The CLI maps these to exit code 2.
    pub fn is_regime_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NoSteadyState { .. }
                | Error::Unbounded { .. }
                | Error::TruncationBreach { .. }
                | Error::UndefinedNormalization(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
