//! Python module `pep_lab`: the closed-form moment results and the
//! truncated-Fock Lindblad engine, importable from Python.
//!
//! Build with `cargo build -p pep-py --release`; the resulting
//! `libpep_lab.so` imports directly as `pep_lab` once renamed to
//! `pep_lab.so` (see `python/smoke_test.py`).

use num_complex::Complex64;
use pep_core::error::Error as CoreError;
use pep_core::fock::{state_fock, FockSpace, ModelParams as CoreParams};
use pep_core::lindblad::{
    build_liouvillian, default_tau_max, evolve, regression_correlator_from,
    spectrum_from_correlator, steady_state, CorrelatorKind, SPECTRUM_DTAU,
};
use pep_core::moments;
use pep_core::phase_space::{husimi, quadrature_stats, GridSpec};
use pep_core::spectral;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: CoreError) -> PyErr {
    if e.is_regime_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// The five physical knobs: detuning, drive amplitude, drive phase, loss
/// rate, Kerr strength (all rates in units of the loss rate).
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct ModelParams {
    inner: CoreParams,
}

#[pymethods]
impl ModelParams {
    #[new]
    #[pyo3(signature = (delta, omega, theta = 0.0, gamma = 1.0, u = 0.0))]
    fn new(delta: f64, omega: f64, theta: f64, gamma: f64, u: f64) -> PyResult<Self> {
        Ok(ModelParams { inner: CoreParams::new(delta, omega, theta, gamma, u).map_err(err)? })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn u(&self) -> f64 {
        self.inner.u
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(delta={}, omega={}, theta={}, gamma={}, u={})",
            self.inner.delta, self.inner.omega, self.inner.theta, self.inner.gamma, self.inner.u
        )
    }
}

/// Derived scales: `{omega_tilde, big_gamma, omega_ep, omega_c, phi}`
/// (absent branches map to None).
#[pyfunction]
fn derived_scales<'py>(
    py: Python<'py>,
    params: &ModelParams,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let s = moments::derived_scales(&params.inner);
    let d = pyo3::types::PyDict::new(py);
    d.set_item("omega_tilde", s.omega_tilde)?;
    d.set_item("big_gamma", s.big_gamma)?;
    d.set_item("omega_ep", s.omega_ep)?;
    d.set_item("omega_c", s.omega_c)?;
    d.set_item("phi", s.phi)?;
    Ok(d)
}

/// Regime tag: one of below_ep, at_ep, above_ep, at_critical, unstable.
#[pyfunction]
fn classify_regime(params: &ModelParams) -> &'static str {
    match moments::classify_regime(&params.inner).tag {
        moments::RegimeTag::BelowEp => "below_ep",
        moments::RegimeTag::AtEp => "at_ep",
        moments::RegimeTag::AboveEp => "above_ep",
        moments::RegimeTag::AtCritical => "at_critical",
        moments::RegimeTag::Unstable => "unstable",
    }
}

/// Closed-form eigenvalues `((w_plus, w_minus), (l_plus, l_minus, l_3))`.
#[pyfunction]
fn moment_eigenvalues(
    params: &ModelParams,
) -> PyResult<((Complex64, Complex64), (Complex64, Complex64, Complex64))> {
    let f = moments::first_moment_system(&params.inner).map_err(err)?;
    let s = moments::second_moment_system(&params.inner).map_err(err)?;
    Ok(((f.values[0], f.values[1]), (s.values[0], s.values[1], s.values[2])))
}

#[pyfunction]
fn population_steady(params: &ModelParams) -> PyResult<f64> {
    moments::population_steady(&params.inner).map_err(err)
}

#[pyfunction]
fn population_transient(params: &ModelParams, n0: f64, t: f64) -> PyResult<f64> {
    moments::population_transient(&params.inner, n0, t).map_err(err)
}

#[pyfunction]
fn g1(params: &ModelParams, tau: f64) -> PyResult<f64> {
    moments::g1(&params.inner, tau).map_err(err)
}

#[pyfunction]
fn g2(params: &ModelParams, tau: f64) -> PyResult<f64> {
    moments::g2(&params.inner, tau).map_err(err)
}

/// Spectral density and its branch decomposition `(total, plus, minus)`.
#[pyfunction]
fn spectrum(params: &ModelParams, omega: f64) -> PyResult<(f64, f64, f64)> {
    let s = moments::spectrum(&params.inner, omega).map_err(err)?;
    Ok((s.total, s.plus, s.minus))
}

/// Steady quadrature variances `(var_x, var_p)`.
#[pyfunction]
fn quadrature_variances(params: &ModelParams) -> PyResult<(f64, f64)> {
    moments::quadrature_variances_steady(&params.inner).map_err(err)
}

#[pyfunction]
fn semiclassical_kerr_population(params: &ModelParams) -> PyResult<f64> {
    moments::semiclassical_kerr_population(&params.inner).map_err(err)
}

/// Engine steady state: `(population, purity, var_x, var_p)`.
#[pyfunction]
fn steady_state_summary(params: &ModelParams, n_levels: usize) -> PyResult<(f64, f64, f64, f64)> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let ss = steady_state(&liouv).map_err(err)?;
    let st = quadrature_stats(&ss, params.inner.theta);
    Ok((ss.population(), ss.purity(), st.var_x, st.var_p))
}

/// Mean population along a time grid from an initial Fock level.
#[pyfunction]
fn evolve_population(
    params: &ModelParams,
    n_levels: usize,
    n0: usize,
    times: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let rho0 = state_fock(space, n0).map_err(err)?;
    let states = evolve(&rho0, &liouv, &times).map_err(err)?;
    Ok(states.iter().map(|s| s.population()).collect())
}

/// Quantum-regression `g1(tau)` samples (complex).
#[pyfunction]
fn regression_g1(params: &ModelParams, n_levels: usize, taus: Vec<f64>) -> PyResult<Vec<Complex64>> {
    regression(params, n_levels, taus, CorrelatorKind::G1Unnormalized)
}

/// Quantum-regression `g2(tau)` samples (real parts).
#[pyfunction]
fn regression_g2(params: &ModelParams, n_levels: usize, taus: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(regression(params, n_levels, taus, CorrelatorKind::G2Unnormalized)?
        .iter()
        .map(|v| v.re)
        .collect())
}

fn regression(
    params: &ModelParams,
    n_levels: usize,
    taus: Vec<f64>,
    kind: CorrelatorKind,
) -> PyResult<Vec<Complex64>> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let ss = steady_state(&liouv).map_err(err)?;
    let trace = regression_correlator_from(&liouv, &ss, kind, &taus).map_err(err)?;
    Ok(trace.normalized())
}

/// Numeric optical spectrum on the given frequency grid.
#[pyfunction]
#[pyo3(signature = (params, n_levels, omegas, tau_max = None))]
fn spectrum_numeric(
    params: &ModelParams,
    n_levels: usize,
    omegas: Vec<f64>,
    tau_max: Option<f64>,
) -> PyResult<Vec<f64>> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let ss = steady_state(&liouv).map_err(err)?;
    let tau_max = tau_max.unwrap_or_else(|| default_tau_max(&params.inner));
    let dt = SPECTRUM_DTAU / params.inner.gamma;
    let mut steps = (tau_max / dt).ceil() as usize;
    if steps % 2 == 1 {
        steps += 1;
    }
    let taus: Vec<f64> = (0..=steps).map(|k| k as f64 * tau_max / steps as f64).collect();
    let trace = regression_correlator_from(&liouv, &ss, CorrelatorKind::G1Unnormalized, &taus)
        .map_err(err)?;
    Ok(spectrum_from_correlator(&trace, &omegas).map_err(err)?.values)
}

/// Husimi function of the steady state:
/// `(re_axis, im_axis, values_row_major, integral)`.
#[pyfunction]
#[pyo3(signature = (params, n_levels, extent = 4.0, points = 201))]
fn husimi_grid(
    params: &ModelParams,
    n_levels: usize,
    extent: f64,
    points: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let ss = steady_state(&liouv).map_err(err)?;
    let grid = husimi(&ss, &GridSpec::symmetric(extent, points).map_err(err)?).map_err(err)?;
    Ok((grid.re_alpha, grid.im_alpha, grid.values, grid.integral))
}

/// Liouvillian spectral gap `(gap, zero_count)`.
#[pyfunction]
fn liouvillian_gap(params: &ModelParams, n_levels: usize) -> PyResult<(f64, usize)> {
    let space = FockSpace::new(n_levels).map_err(err)?;
    let liouv = build_liouvillian(&params.inner, space).map_err(err)?;
    let g = spectral::gap(&liouv).map_err(err)?;
    Ok((g.gap, g.zero_count))
}

#[pymodule]
fn pep_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModelParams>()?;
    m.add_function(wrap_pyfunction!(derived_scales, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(moment_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(population_steady, m)?)?;
    m.add_function(wrap_pyfunction!(population_transient, m)?)?;
    m.add_function(wrap_pyfunction!(g1, m)?)?;
    m.add_function(wrap_pyfunction!(g2, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_variances, m)?)?;
    m.add_function(wrap_pyfunction!(semiclassical_kerr_population, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_summary, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_population, m)?)?;
    m.add_function(wrap_pyfunction!(regression_g1, m)?)?;
    m.add_function(wrap_pyfunction!(regression_g2, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(husimi_grid, m)?)?;
    m.add_function(wrap_pyfunction!(liouvillian_gap, m)?)?;
    Ok(())
}
