//! Self-contained dense complex linear algebra and ODE integration kernel.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! once constructed and safe to hand to parallel workers.

pub mod eig;
pub mod expm;
pub mod fit;
pub mod lu;
pub mod matrix;
pub mod ode;

pub use eig::{eig_general, eigenvalues, normalize_phase, overlap, vector_rank, EigenSystem};
pub use expm::expm;
pub use fit::{least_squares_fit, log_residuals, FitModel, FitResult};
pub use lu::{lu_decompose, solve_linear, LuFactors};
pub use matrix::{vec_dot, vec_max_abs, vec_norm, vec_scale, C64, ComplexMatrix, ComplexVector};
pub use ode::{integrate_ode, integrate_ode_observed, OdeSolution, OdeStats, DEFAULT_ATOL, DEFAULT_RTOL};
