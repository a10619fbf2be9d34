//! Full density-matrix engine on the truncated Fock space: Liouvillian
//! superoperator, time evolution, steady state, purity, quantum-regression
//! two-time correlators, and the numeric optical spectrum.
//!
//! Vectorization convention: a density matrix is flattened in row-major
//! order (`vec[i*N + j] = rho[i][j]`), under which
//! `L = -i (H kron I - I kron H^T)
//!    + gamma (b kron conj(b) - 1/2 n kron I - 1/2 I kron n^T)`
//! with `n = b'b`.  The convention is pinned by a test comparing the dense
//! superoperator action with direct commutator arithmetic on random states.

use crate::error::{Error, Result};
use crate::fock::{hamiltonian, ladder_ops, ModelParams, FockSpace, QuantumState};
use crate::moments::derived_scales;
use crate::numerics::{integrate_ode, lu_decompose, vec_max_abs, C64, ComplexMatrix};
use crate::series::{FrequencyTrace, TimeTrace};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest truncation for which the dense superoperator is built by
/// default; `N = 80` means a 6400 x 6400 complex matrix (~650 MB).
pub const DEFAULT_CAPACITY_CAP: usize = 80;

/// Evolution snapshots must satisfy these physicality tolerances.
pub const SNAPSHOT_TRACE_TOL: f64 = 1e-6;
pub const SNAPSHOT_HERM_TOL: f64 = 1e-8;
pub const SNAPSHOT_EIG_TOL: f64 = 1e-6;

/// The Lindblad generator for one (params, truncation) pair, kept both as a
/// dense matrix (spectral work, steady states) and as the operator triple
/// (fast structured application during time evolution).
pub struct Liouvillian {
    pub matrix: ComplexMatrix,
    pub params: ModelParams,
    pub space: FockSpace,
    ham: ComplexMatrix,
    lower: ComplexMatrix,
    raise: ComplexMatrix,
    number: ComplexMatrix,
}

pub fn build_liouvillian(params: &ModelParams, space: FockSpace) -> Result<Liouvillian> {
    build_liouvillian_with_cap(params, space, DEFAULT_CAPACITY_CAP)
}

pub fn build_liouvillian_with_cap(
    params: &ModelParams,
    space: FockSpace,
    cap: usize,
) -> Result<Liouvillian> {
    params.validate()?;
    let n = space.n_levels();
    if n > cap {
        return Err(Error::Capacity { n, cap, dim: n * n });
    }
    let ham = hamiltonian(params, space);
    let (lower, raise) = ladder_ops(space);
    let number = &raise * &lower;
    let ident = ComplexMatrix::identity(n);
    let g = params.gamma;

    let mut matrix = ComplexMatrix::zeros(n * n, n * n);
    let minus_i = C64::new(0.0, -1.0);
    let acc = |m: &mut ComplexMatrix, term: ComplexMatrix, w: C64| {
        for (dst, src) in m.data_mut().iter_mut().zip(term.data()) {
            *dst += w * src;
        }
    };
    acc(&mut matrix, ham.kron(&ident), minus_i);
    acc(&mut matrix, ident.kron(&ham.transpose()), -minus_i);
    acc(&mut matrix, lower.kron(&lower.conj()), C64::new(g, 0.0));
    acc(&mut matrix, number.kron(&ident), C64::new(-0.5 * g, 0.0));
    acc(&mut matrix, ident.kron(&number.transpose()), C64::new(-0.5 * g, 0.0));

    Ok(Liouvillian { matrix, params: *params, space, ham, lower, raise, number })
}

impl Liouvillian {
    pub fn n_levels(&self) -> usize {
        self.space.n_levels()
    }

    /// Dimension of the flattened state space, `N^2`.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn annihilation(&self) -> &ComplexMatrix {
        &self.lower
    }

    pub fn creation(&self) -> &ComplexMatrix {
        &self.raise
    }

    pub fn number_op(&self) -> &ComplexMatrix {
        &self.number
    }

    pub fn hamiltonian_matrix(&self) -> &ComplexMatrix {
        &self.ham
    }

    /// Structured application `L[sigma] = -i[H, sigma]
    /// + gamma (b sigma b' - (n sigma + sigma n)/2)`; O(N^3) instead of the
    /// O(N^4) dense mat-vec, used in the evolution inner loop.
    pub fn apply_to(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        let h_s = &self.ham * sigma;
        let s_h = sigma * &self.ham;
        let jump = &(&self.lower * sigma) * &self.raise;
        let n_s = &self.number * sigma;
        let s_n = sigma * &self.number;
        let g = self.params.gamma;
        let mi = C64::new(0.0, -1.0);
        ComplexMatrix::from_fn(sigma.rows(), sigma.cols(), |i, j| {
            mi * (h_s[(i, j)] - s_h[(i, j)])
                + g * (jump[(i, j)] - 0.5 * (n_s[(i, j)] + s_n[(i, j)]))
        })
    }

    /// Same action through the dense matrix (slow path, used for checks).
    pub fn apply_dense(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        let v = self.matrix.apply(sigma.data());
        ComplexMatrix::from_data(sigma.rows(), sigma.cols(), v)
    }
}

/// Row-major flattened indices split by the conserved photon-number parity
/// of `|i><j|` (the generator only couples elements with equal `(i-j) mod 2`,
/// so the superoperator is block-diagonal in this grading).
pub fn parity_sector_indices(n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut even = Vec::with_capacity(n * n / 2 + n);
    let mut odd = Vec::with_capacity(n * n / 2);
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 0 {
                even.push(i * n + j);
            } else {
                odd.push(i * n + j);
            }
        }
    }
    (even, odd)
}

/// Evolve a density matrix over the sample grid `t_grid` (first entry is the
/// initial time).  Every snapshot is re-validated and the mean population is
/// guarded against the truncation ceiling `0.5 N`.
pub fn evolve(rho0: &QuantumState, liouv: &Liouvillian, t_grid: &[f64]) -> Result<Vec<QuantumState>> {
    evolve_matrix(rho0.matrix(), liouv, t_grid, true)
}

/// Evolve and keep only the mean population, as a labelled series.
pub fn population_time_trace(
    rho0: &QuantumState,
    liouv: &Liouvillian,
    t_grid: &[f64],
) -> Result<TimeTrace> {
    let states = evolve(rho0, liouv, t_grid)?;
    Ok(TimeTrace::new(
        format!("n(t), N={}", liouv.n_levels()),
        t_grid.to_vec(),
        states.iter().map(|s| s.population()).collect(),
    ))
}

/// Evolution core shared with the regression correlators; `physical` turns
/// the density-matrix checks on (they do not apply to the operator-valued
/// initial conditions of the regression formula).
fn evolve_matrix(
    sigma0: &ComplexMatrix,
    liouv: &Liouvillian,
    t_grid: &[f64],
    physical: bool,
) -> Result<Vec<QuantumState>> {
    let n = liouv.n_levels();
    if sigma0.rows() != n || sigma0.cols() != n {
        return Err(Error::Dimension(format!(
            "state is {}x{} but the generator acts on {n}x{n}",
            sigma0.rows(),
            sigma0.cols()
        )));
    }
    let mut scratch = ComplexMatrix::zeros(n, n);
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        scratch.data_mut().copy_from_slice(y);
        let out = liouv.apply_to(&scratch);
        dy.copy_from_slice(out.data());
    };
    let sol = integrate_ode(
        rhs,
        sigma0.data(),
        t_grid,
        crate::numerics::DEFAULT_RTOL,
        crate::numerics::DEFAULT_ATOL,
    )?;

    let limit = 0.5 * n as f64;
    let mut out = Vec::with_capacity(sol.states.len());
    for (t, flat) in sol.times.iter().zip(sol.states.into_iter()) {
        let state = QuantumState::from_unchecked(ComplexMatrix::from_data(n, n, flat));
        if physical {
            let pop = state.population();
            if pop > limit {
                return Err(Error::TruncationBreach { t: *t, population: pop, limit });
            }
            state
                .validate(SNAPSHOT_HERM_TOL, SNAPSHOT_TRACE_TOL, SNAPSHOT_EIG_TOL)
                .map_err(|e| Error::Physicality(format!("at t = {t:.4}: {e}")))?;
        }
        out.push(state);
    }
    Ok(out)
}

/// Steady state of the generator, found as its null vector.  The search
/// runs in the even parity sector (the trace functional lives there, so the
/// steady state does too), by LU-based inverse iteration with a tiny shift;
/// the residual against the *full* generator is then verified.
pub fn steady_state(liouv: &Liouvillian) -> Result<QuantumState> {
    let n = liouv.n_levels();
    let (even, _) = parity_sector_indices(n);
    let block = liouv.matrix.select(&even, &even);
    let scale = block.norm_one().max(f64::MIN_POSITIVE);
    let shift = C64::new(1e-10 * scale, 0.0);
    let mut shifted = block.clone();
    for k in 0..even.len() {
        shifted[(k, k)] -= shift;
    }
    let lu = lu_decompose(&shifted)?;

    let solve_from = |start: &[C64]| -> Vec<C64> {
        let mut x = start.to_vec();
        for _ in 0..3 {
            x = lu.solve(&x);
            let norm = crate::numerics::vec_norm(&x);
            crate::numerics::vec_scale(&mut x, C64::new(1.0 / norm, 0.0));
        }
        x
    };

    // start from the maximally mixed state (unit overlap with the target)
    let start: Vec<C64> = even
        .iter()
        .map(|&k| {
            let (i, j) = (k / n, k % n);
            if i == j { C64::new(1.0 / n as f64, 0.0) } else { C64::new(0.0, 0.0) }
        })
        .collect();
    let x = solve_from(&start);

    // a second, random start must converge to the same direction
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b9);
    let random: Vec<C64> =
        (0..even.len()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let y = solve_from(&random);
    if crate::numerics::overlap(&x, &y) < 1.0 - 1e-6 {
        return Err(Error::DegenerateSteadyState);
    }

    // embed into the full space, hermitize, normalize the trace
    let mut rho = ComplexMatrix::zeros(n, n);
    for (pos, &k) in even.iter().enumerate() {
        rho.data_mut()[k] = x[pos];
    }
    let tr = rho.trace();
    if tr.norm() < 1e-10 {
        return Err(Error::DegenerateSteadyState);
    }
    let mut rho = rho.scale(C64::new(1.0, 0.0) / tr);
    rho.hermitize();

    let residual = vec_max_abs(liouv.apply_to(&rho).data());
    if residual > 1e-9 * liouv.params.gamma {
        return Err(Error::NonConvergence { residual });
    }
    let state = QuantumState::from_unchecked(rho);
    state.validate(1e-9, 1e-9, 1e-7)?;
    Ok(state)
}

/// `Tr(rho^2)`.
pub fn purity(rho: &QuantumState) -> f64 {
    rho.purity()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CorrelatorKind {
    /// `<b'(0) b(tau)>` in the steady state.
    G1Unnormalized,
    /// `<b'(0) b'(tau) b(tau) b(0)>` in the steady state.
    G2Unnormalized,
}

/// Raw two-time correlator samples plus the steady population used to
/// normalize them.
#[derive(Clone, Debug)]
pub struct CorrelatorTrace {
    pub taus: Vec<f64>,
    pub values: Vec<C64>,
    pub kind: CorrelatorKind,
    pub steady_population: f64,
}

impl CorrelatorTrace {
    /// `g1(tau)` or `g2(tau)`: values over `<n>` or `<n>^2` respectively.
    pub fn normalized(&self) -> Vec<C64> {
        let den = match self.kind {
            CorrelatorKind::G1Unnormalized => self.steady_population,
            CorrelatorKind::G2Unnormalized => self.steady_population * self.steady_population,
        };
        self.values.iter().map(|v| v / den).collect()
    }
}

/// Quantum-regression two-time correlator: evolve the operator-dressed
/// steady state under the same generator and trace against the observable.
pub fn regression_correlator(
    liouv: &Liouvillian,
    kind: CorrelatorKind,
    tau_grid: &[f64],
) -> Result<CorrelatorTrace> {
    let rho_ss = steady_state(liouv)?;
    regression_correlator_from(liouv, &rho_ss, kind, tau_grid)
}

/// Same, reusing a previously computed steady state.  The operator-valued
/// state is never materialized per sample; only the observable trace is
/// recorded, so arbitrarily long delay grids stay cheap in memory.
pub fn regression_correlator_from(
    liouv: &Liouvillian,
    rho_ss: &QuantumState,
    kind: CorrelatorKind,
    tau_grid: &[f64],
) -> Result<CorrelatorTrace> {
    let n = liouv.n_levels();
    let n_ss = rho_ss.population();
    let sigma0 = match kind {
        CorrelatorKind::G1Unnormalized => &liouv.lower * rho_ss.matrix(),
        CorrelatorKind::G2Unnormalized => &(&liouv.lower * rho_ss.matrix()) * &liouv.raise,
    };
    let observable = match kind {
        CorrelatorKind::G1Unnormalized => &liouv.raise,
        CorrelatorKind::G2Unnormalized => &liouv.number,
    };
    let mut scratch = ComplexMatrix::zeros(n, n);
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        scratch.data_mut().copy_from_slice(y);
        let out = liouv.apply_to(&scratch);
        dy.copy_from_slice(out.data());
    };
    let mut values = vec![C64::new(0.0, 0.0); tau_grid.len()];
    crate::numerics::integrate_ode_observed(
        rhs,
        sigma0.data(),
        tau_grid,
        crate::numerics::DEFAULT_RTOL,
        crate::numerics::DEFAULT_ATOL,
        |idx, _t, y| {
            // tr(A sigma) = sum_{i,k} A[i,k] sigma[k,i]
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..n {
                for k in 0..n {
                    let a = observable[(i, k)];
                    if a.re != 0.0 || a.im != 0.0 {
                        tr += a * y[k * n + i];
                    }
                }
            }
            values[idx] = tr;
        },
    )?;
    Ok(CorrelatorTrace { taus: tau_grid.to_vec(), values, kind, steady_population: n_ss })
}

/// Default delay-grid spacing for the spectrum quadrature (units 1/gamma).
pub const SPECTRUM_DTAU: f64 = 0.005;

/// A long enough delay window that the correlator tail is below `1e-8` of
/// its peak: 20 decay constants of the slowest branch.
pub fn default_tau_max(params: &ModelParams) -> f64 {
    let scales = derived_scales(params);
    let slowest = match scales.big_gamma {
        Some(gg) if gg > 0.0 => 0.5 * params.gamma - gg,
        _ => 0.5 * params.gamma,
    };
    let floor = 40.0 / params.gamma;
    if slowest > 0.0 { (20.0 / slowest).max(floor) } else { floor }
}

/// Numeric optical spectrum: half-Fourier transform of the regression `g1`
/// correlator by Simpson quadrature on a uniform delay grid, normalized by
/// the steady population so the full spectral integral is 1.
pub fn spectrum_numeric(
    liouv: &Liouvillian,
    omega_grid: &[f64],
    tau_max: f64,
) -> Result<FrequencyTrace> {
    let params = &liouv.params;
    let scales = derived_scales(params);
    if params.omega >= scales.omega_c {
        return Err(Error::NoSteadyState { omega: params.omega, omega_c: scales.omega_c });
    }
    if omega_grid.len() < 2 {
        return Err(Error::InvalidArgument("omega grid needs at least two points".into()));
    }

    let dt = SPECTRUM_DTAU / params.gamma;
    let mut steps = (tau_max / dt).ceil() as usize;
    if steps % 2 == 1 {
        steps += 1; // Simpson needs an even interval count
    }
    let taus: Vec<f64> = (0..=steps).map(|k| k as f64 * tau_max / steps as f64).collect();
    let trace = regression_correlator(liouv, CorrelatorKind::G1Unnormalized, &taus)?;
    spectrum_from_correlator(&trace, omega_grid)
}

/// Half-Fourier quadrature of an already-computed `g1` correlator trace on
/// a uniform delay grid with an even interval count (Simpson weights).
pub fn spectrum_from_correlator(
    trace: &CorrelatorTrace,
    omega_grid: &[f64],
) -> Result<FrequencyTrace> {
    if trace.kind != CorrelatorKind::G1Unnormalized {
        return Err(Error::InvalidArgument("spectrum needs a g1 correlator".into()));
    }
    let steps = trace.taus.len() - 1;
    if steps < 2 || steps % 2 == 1 {
        return Err(Error::InvalidArgument("delay grid needs an even interval count".into()));
    }
    let peak = trace.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = trace.values.last().unwrap().norm();
    if tail > 1e-8 * peak {
        return Err(Error::Windowing { tail_fraction: tail / peak });
    }

    let g1 = trace.normalized();
    let h = trace.taus[1] - trace.taus[0];
    let values: Vec<f64> = omega_grid
        .iter()
        .map(|&w| {
            // phase recurrence: e^{i w tau_k} built by one multiply per step
            let rot = C64::new(0.0, w * h).exp();
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for (k, gk) in g1.iter().enumerate() {
                let weight = if k == 0 || k == steps {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += weight * gk * phase;
                phase *= rot;
            }
            (h / 3.0) * acc.re / std::f64::consts::PI
        })
        .collect();

    Ok(FrequencyTrace::new("S(omega), numeric", omega_grid.to_vec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{state_fock, state_vacuum};
    use crate::series::linspace;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_level_undriven_spectrum() {
        // omega = u = 0, N = 2: eigenvalues {0, -g, -g/2 pm i delta}
        let p = ModelParams::harmonic(1.5, 0.0);
        let l = build_liouvillian(&p, FockSpace::new(2).unwrap()).unwrap();
        let mut vals = crate::numerics::eigenvalues(&l.matrix).unwrap();
        vals.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let mut want = vec![c(0.0, 0.0), c(-1.0, 0.0), c(-0.5, 1.5), c(-0.5, -1.5)];
        want.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        for w in &want {
            let best = vals.iter().map(|v| (v - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "missing eigenvalue {w}");
        }
    }

    #[test]
    fn dense_action_matches_structured_action() {
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = ModelParams::new(1.5, 0.9, 0.6, 1.0, 0.02).unwrap();
        let space = FockSpace::new(7).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let sigma = ComplexMatrix::from_fn(7, 7, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let a = l.apply_to(&sigma);
        let b = l.apply_dense(&sigma);
        assert!((&a - &b).max_abs() < 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn trace_functional_is_left_null_vector() {
        let p = ModelParams::new(1.2, 0.8, -0.4, 1.0, 0.01).unwrap();
        let n = 6;
        let l = build_liouvillian(&p, FockSpace::new(n).unwrap()).unwrap();
        // (t^dagger L)[col] = sum_i L[(i*n+i, col)]
        let mut worst = 0.0f64;
        for col in 0..n * n {
            let mut s = c(0.0, 0.0);
            for i in 0..n {
                s += l.matrix[(i * n + i, col)];
            }
            worst = worst.max(s.norm());
        }
        assert!(worst <= 1e-12 * l.matrix.max_abs());
    }

    #[test]
    fn vacuum_is_steady_without_drive() {
        let p = ModelParams::harmonic(1.5, 0.0);
        let space = FockSpace::new(10).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let vac = state_vacuum(space);
        assert!(vec_max_abs(l.apply_to(vac.matrix()).data()) < 1e-14);
        let ss = steady_state(&l).unwrap();
        assert!(ss.population() < 1e-12);
        assert!((ss.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parity_blocks_cover_generator() {
        let p = ModelParams::new(1.0, 0.7, 0.3, 1.0, 0.01).unwrap();
        let n = 6;
        let l = build_liouvillian(&p, FockSpace::new(n).unwrap()).unwrap();
        let (even, odd) = parity_sector_indices(n);
        assert_eq!(even.len() + odd.len(), n * n);
        let cross1 = l.matrix.select(&even, &odd);
        let cross2 = l.matrix.select(&odd, &even);
        assert_eq!(cross1.max_abs(), 0.0);
        assert_eq!(cross2.max_abs(), 0.0);
    }

    #[test]
    fn capacity_cap_enforced() {
        let p = ModelParams::harmonic(1.0, 0.5);
        let r = build_liouvillian(&p, FockSpace::new(81).unwrap());
        assert!(matches!(r, Err(Error::Capacity { .. })));
    }

    #[test]
    fn pure_decay_population() {
        // omega = 0, rho0 = |1><1|: n(t) = e^{-gamma t}
        let p = ModelParams::harmonic(1.5, 0.0);
        let space = FockSpace::new(6).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let rho0 = state_fock(space, 1).unwrap();
        let grid = linspace(0.0, 3.0, 31);
        let states = evolve(&rho0, &l, &grid).unwrap();
        for (t, s) in grid.iter().zip(&states) {
            assert!((s.population() - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn evolution_matches_closed_form_below_critical() {
        // delta = 1.5, omega = 1, N = 40: matches the oscillatory closed form
        let p = ModelParams::harmonic(1.5, 1.0);
        let space = FockSpace::new(40).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let rho0 = state_fock(space, 1).unwrap();
        let grid = linspace(0.0, 6.0, 61);
        let states = evolve(&rho0, &l, &grid).unwrap();
        let mut worst = 0.0f64;
        for (t, s) in grid.iter().zip(&states) {
            let want = crate::moments::population_transient(&p, 1.0, *t).unwrap();
            worst = worst.max((s.population() - want).abs());
        }
        assert!(worst < 1e-4, "max deviation {worst}");
    }

    #[test]
    fn truncation_breach_detected() {
        // a strong two-photon drive pushes an already-excited state past N/2
        let p = ModelParams::harmonic(1.0, 8.0);
        let space = FockSpace::new(12).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let rho0 = state_fock(space, 5).unwrap();
        let grid = linspace(0.0, 2.0, 81);
        match evolve(&rho0, &l, &grid) {
            Err(Error::TruncationBreach { population, t, .. }) => {
                assert!(population > 6.0);
                assert!(t > 0.0 && t < 0.5);
            }
            other => panic!("expected truncation breach, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn steady_state_population_one_third() {
        let p = ModelParams::harmonic(1.5, 1.0);
        let space = FockSpace::new(40).unwrap();
        let l = build_liouvillian(&p, space).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!((ss.population() - 1.0 / 3.0).abs() < 1e-5, "n = {}", ss.population());
        // quadrature variances against the closed form
        let (x, pq) = crate::fock::quadrature_ops(0.0, space);
        let x2 = ss.expect(&(&x * &x)).re - ss.expect(&x).re.powi(2);
        let p2 = ss.expect(&(&pq * &pq)).re - ss.expect(&pq).re.powi(2);
        let (sx, sp) = crate::moments::quadrature_variances_steady(&p).unwrap();
        assert!((x2 - sx).abs() < 1e-4, "{x2} vs {sx}");
        assert!((p2 - sp).abs() < 1e-4, "{p2} vs {sp}");
    }

    #[test]
    fn purity_reference_values() {
        let space = FockSpace::new(10).unwrap();
        assert!((purity(&state_fock(space, 3).unwrap()) - 1.0).abs() < 1e-12);
        let mixed = QuantumState::new(
            ComplexMatrix::diagonal(&vec![c(0.1, 0.0); 10]),
        )
        .unwrap();
        assert!((purity(&mixed) - 0.1).abs() < 1e-12);
        // Steady state well below critical stays close to pure.  The exact
        // value at delta = 1, omega = 0.5 is the Gaussian-state purity
        // 1/(2 sqrt(det V)) = 2/sqrt(5) with V from the steady moments.
        let p = ModelParams::harmonic(1.0, 0.5);
        let l = build_liouvillian(&p, FockSpace::new(30).unwrap()).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!((ss.purity() - 2.0 / 5f64.sqrt()).abs() < 1e-8, "purity {}", ss.purity());
        // lower drive, closer to unity
        let p = ModelParams::harmonic(1.0, 0.2);
        let l = build_liouvillian(&p, FockSpace::new(20).unwrap()).unwrap();
        assert!(steady_state(&l).unwrap().purity() > 0.98);
    }

    #[test]
    fn regression_g1_matches_closed_form() {
        let p = ModelParams::harmonic(1.5, 0.5);
        let l = build_liouvillian(&p, FockSpace::new(30).unwrap()).unwrap();
        let taus = linspace(0.0, 6.0, 61);
        let trace = regression_correlator(&l, CorrelatorKind::G1Unnormalized, &taus).unwrap();
        let g1 = trace.normalized();
        assert!((g1[0] - c(1.0, 0.0)).norm() < 1e-9); // exact by normalization
        let mut worst = 0.0f64;
        for (tau, v) in taus.iter().zip(&g1) {
            let want = crate::moments::g1(&p, *tau).unwrap();
            worst = worst.max((v.re - want).abs().max(v.im.abs()));
        }
        assert!(worst < 1e-4, "max deviation {worst}");
    }

    #[test]
    fn regression_g2_matches_closed_form() {
        let p = ModelParams::harmonic(1.5, 1.0);
        let l = build_liouvillian(&p, FockSpace::new(30).unwrap()).unwrap();
        let taus = linspace(0.0, 6.0, 61);
        let trace = regression_correlator(&l, CorrelatorKind::G2Unnormalized, &taus).unwrap();
        let g2 = trace.normalized();
        let mut worst = 0.0f64;
        for (tau, v) in taus.iter().zip(&g2) {
            let want = crate::moments::g2(&p, *tau).unwrap();
            worst = worst.max((v.re - want).abs());
        }
        assert!(worst < 1e-4, "max deviation {worst}");
    }

    #[test]
    fn numeric_spectrum_doublet() {
        let p = ModelParams::harmonic(1.5, 0.5);
        let l = build_liouvillian(&p, FockSpace::new(25).unwrap()).unwrap();
        let omegas = linspace(-4.0, 4.0, 161);
        let s = spectrum_numeric(&l, &omegas, default_tau_max(&p)).unwrap();
        let peak = s.values.iter().cloned().fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (w, v) in s.omegas.iter().zip(&s.values) {
            let want = crate::moments::spectrum(&p, *w).unwrap().total;
            worst = worst.max((v - want).abs());
        }
        assert!(worst < 1e-3 * peak, "max deviation {worst}, peak {peak}");
        // The exact doublet maxima of the two-Lorentzian product sit at
        // +- sqrt(wt^2 - (gamma/2)^2), slightly inside +- wt.
        let peak_at = (2.0f64 - 0.25).sqrt();
        let imax =
            s.values.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
        assert!((s.omegas[imax].abs() - peak_at).abs() < 0.051);
    }

    #[test]
    fn windowing_error_on_short_tail() {
        let p = ModelParams::harmonic(1.5, 0.5);
        let l = build_liouvillian(&p, FockSpace::new(12).unwrap()).unwrap();
        let omegas = linspace(-2.0, 2.0, 11);
        match spectrum_numeric(&l, &omegas, 3.0) {
            Err(Error::Windowing { tail_fraction }) => assert!(tail_fraction > 1e-8),
            other => panic!("expected windowing error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn spectrum_rejected_beyond_critical() {
        let p = ModelParams::harmonic(1.5, 1.7);
        let l = build_liouvillian(&p, FockSpace::new(10).unwrap()).unwrap();
        let omegas = linspace(-2.0, 2.0, 11);
        assert!(matches!(
            spectrum_numeric(&l, &omegas, 40.0),
            Err(Error::NoSteadyState { .. })
        ));
    }
}
