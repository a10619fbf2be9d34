//! Simulator for a parametrically driven, dissipative quantum oscillator.
//!
//! The model is a single bosonic mode with detuning `delta`, two-photon
//! drive of amplitude `omega` and phase `theta`, single-photon loss at rate
//! `gamma`, and an optional Kerr interaction `u`.  Two independent layers
//! compute its observables:
//!
//! * [`moments`] -- closed-form results for the first/second moments,
//!   coherence functions `g1`/`g2`, the optical spectrum, quadrature
//!   variances, and regime classification around the exceptional point
//!   `omega = delta` and the critical point `omega_c`;
//! * [`lindblad`] -- a truncated-Fock density-matrix engine (superoperator
//!   build, time evolution, steady state, quantum-regression correlators and
//!   numeric spectra) that cross-checks the closed forms.
//!
//! [`spectral`] studies the Liouvillian eigen-spectrum (gap scaling with
//! truncation), [`phase_space`] computes Husimi distributions and quadrature
//! statistics, and [`verify`] bundles the analytic-vs-numeric agreement
//! checks used by the CLI and the acceptance tests.
//!
//! All quantities are expressed in units of the loss rate (`gamma = 1` is
//! the conventional choice; the parameter is explicit everywhere).

pub mod error;
pub mod fock;
pub mod lindblad;
pub mod moments;
pub mod numerics;
pub mod phase_space;
pub mod series;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{FockSpace, ModelParams, QuantumState};
pub use numerics::{C64, ComplexMatrix};
