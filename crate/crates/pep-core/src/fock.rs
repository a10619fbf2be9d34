//! Truncated Fock space: model parameters, ladder operators, Hamiltonians,
//! quadratures, and canonical states.

use crate::error::{Error, Result};
use crate::numerics::{expm, C64, ComplexMatrix};
use serde::{Deserialize, Serialize};

/// The five physical knobs of the model.  `gamma` sets the unit of rate;
/// every other rate-like field is naturally quoted in units of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Detuning `delta >= 0`.
    pub delta: f64,
    /// Two-photon drive amplitude `omega >= 0`.
    pub omega: f64,
    /// Drive phase, `|theta| <= pi`.
    pub theta: f64,
    /// Loss rate `gamma > 0`.
    pub gamma: f64,
    /// Kerr interaction strength `u >= 0`.
    pub u: f64,
}

impl ModelParams {
    pub fn new(delta: f64, omega: f64, theta: f64, gamma: f64, u: f64) -> Result<Self> {
        let p = ModelParams { delta, omega, theta, gamma, u };
        p.validate()?;
        Ok(p)
    }

    /// Harmonic oscillator (`u = 0`, `theta = 0`) in units `gamma = 1`.
    pub fn harmonic(delta: f64, omega: f64) -> Self {
        ModelParams::new(delta, omega, 0.0, 1.0, 0.0).expect("valid harmonic parameters")
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        ModelParams::new(self.delta, omega, self.theta, self.gamma, self.u)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.delta, self.omega, self.theta, self.gamma, self.u]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidArgument(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.delta < 0.0 || self.omega < 0.0 || self.u < 0.0 {
            return Err(Error::InvalidArgument(
                "delta, omega and u must be non-negative".into(),
            ));
        }
        if self.theta.abs() > std::f64::consts::PI {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [-pi, pi], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Number of retained levels `|0> .. |N-1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_levels: usize,
}

/// Truncation used throughout the figures of the study.
pub const DEFAULT_N_LEVELS: usize = 40;

impl FockSpace {
    pub fn new(n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::Dimension(format!("need at least 2 levels, got {n_levels}")));
        }
        Ok(FockSpace { n_levels })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }
}

impl Default for FockSpace {
    fn default() -> Self {
        FockSpace { n_levels: DEFAULT_N_LEVELS }
    }
}

/// Annihilation and creation operators on the truncated space.  `b` carries
/// `sqrt(n)` on the first superdiagonal; `[b, b^dagger]` equals the identity
/// except for the `(N-1, N-1)` entry, which is `1 - N` (truncation artifact).
pub fn ladder_ops(space: FockSpace) -> (ComplexMatrix, ComplexMatrix) {
    let n = space.n_levels();
    let mut b = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        b[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let bd = b.dagger();
    (b, bd)
}

/// The number operator `b^dagger b = diag(0, 1, ..., N-1)`.
pub fn number_op(space: FockSpace) -> ComplexMatrix {
    let n = space.n_levels();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) }
    })
}

/// `H = delta b'b + (omega/2) e^{i theta} b'b' + (omega/2) e^{-i theta} bb
///    + (u/2) b'b'bb`, Hermitian by construction.
pub fn hamiltonian(params: &ModelParams, space: FockSpace) -> ComplexMatrix {
    let n = space.n_levels();
    let mut h = ComplexMatrix::zeros(n, n);
    let drive = 0.5 * params.omega * C64::new(0.0, params.theta).exp();
    for k in 0..n {
        let kf = k as f64;
        h[(k, k)] = C64::new(params.delta * kf + 0.5 * params.u * kf * (kf - 1.0), 0.0);
        if k + 2 < n {
            // <k+2| b'b' |k> = sqrt((k+1)(k+2))
            let amp = ((kf + 1.0) * (kf + 2.0)).sqrt();
            h[(k + 2, k)] = drive * amp;
            h[(k, k + 2)] = drive.conj() * amp;
        }
    }
    h
}

/// Quadratures `X = (e^{i theta/2} b' + e^{-i theta/2} b)/sqrt(2)` and
/// `P = i (e^{i theta/2} b' - e^{-i theta/2} b)/sqrt(2)`; the half-phase
/// compensates the drive phase so that X is the squeezed direction.
pub fn quadrature_ops(theta: f64, space: FockSpace) -> (ComplexMatrix, ComplexMatrix) {
    let (b, bd) = ladder_ops(space);
    let ph = C64::new(0.0, 0.5 * theta).exp();
    let inv_sqrt2 = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let x = &(&bd.scale(ph) + &b.scale(ph.conj())) * inv_sqrt2;
    let p = &(&bd.scale(ph) - &b.scale(ph.conj())) * (inv_sqrt2 * C64::new(0.0, 1.0));
    (x, p)
}

/// A density matrix on the truncated space.
#[derive(Clone, Debug)]
pub struct QuantumState {
    rho: ComplexMatrix,
}

impl QuantumState {
    /// Wrap a density matrix, validating Hermiticity, unit trace and
    /// positivity at construction tolerances.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let state = QuantumState { rho };
        state.validate(1e-10, 1e-8, 1e-8)?;
        Ok(state)
    }

    /// Wrap without validation (used by the evolution engine, which applies
    /// its own per-snapshot checks at looser tolerances).
    pub fn from_unchecked(rho: ComplexMatrix) -> Self {
        QuantumState { rho }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn n_levels(&self) -> usize {
        self.rho.rows()
    }

    /// `Tr(O rho)`.
    pub fn expect(&self, op: &ComplexMatrix) -> C64 {
        let n = self.rho.rows();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += op[(i, k)] * self.rho[(k, i)];
            }
        }
        s
    }

    /// Mean occupation `<b'b>`.
    pub fn population(&self) -> f64 {
        (0..self.rho.rows()).map(|k| k as f64 * self.rho[(k, k)].re).sum()
    }

    /// `Tr(rho^2)`, real in (0, 1] for a valid state.
    pub fn purity(&self) -> f64 {
        let n = self.rho.rows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (self.rho[(i, j)] * self.rho[(j, i)]).re;
            }
        }
        s
    }

    /// Check Hermiticity, trace and positivity at the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<()> {
        if !self.rho.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let defect = self.rho.hermiticity_defect();
        if defect > herm_tol * self.rho.max_abs().max(1e-300) {
            return Err(Error::Physicality(format!("Hermiticity defect {defect:.3e}")));
        }
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::Physicality(format!("trace = {tr} is not 1")));
        }
        let lam_min = self.min_eigenvalue()?;
        if lam_min < -eig_tol {
            return Err(Error::Physicality(format!("negative eigenvalue {lam_min:.3e}")));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut h = self.rho.clone();
        h.hermitize();
        let vals = crate::numerics::eigenvalues(&h)?;
        Ok(vals.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
    }
}

/// Vacuum state `|0><0|`.
pub fn state_vacuum(space: FockSpace) -> QuantumState {
    state_fock(space, 0).expect("vacuum always fits")
}

/// Number state `|n><n|`.
pub fn state_fock(space: FockSpace, n: usize) -> Result<QuantumState> {
    let dim = space.n_levels();
    if n >= dim {
        return Err(Error::Range { index: n, n_levels: dim });
    }
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho[(n, n)] = C64::new(1.0, 0.0);
    Ok(QuantumState { rho })
}

/// Coherent state `|alpha><alpha|` with Poissonian populations, built from
/// the stable amplitude recurrence `c_n = c_{n-1} alpha / sqrt(n)`.
pub fn state_coherent(space: FockSpace, alpha: C64) -> Result<QuantumState> {
    let dim = space.n_levels();
    if alpha.norm_sqr() > 0.25 * dim as f64 {
        return Err(Error::InvalidArgument(format!(
            "|alpha|^2 = {:.2} too large for N = {dim}",
            alpha.norm_sqr()
        )));
    }
    let mut c = vec![C64::new(0.0, 0.0); dim];
    c[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        c[n] = c[n - 1] * alpha / C64::new((n as f64).sqrt(), 0.0);
    }
    let rho = ComplexMatrix::from_fn(dim, dim, |i, j| c[i] * c[j].conj());
    QuantumState::new(rho)
}

/// Squeezed number state `S_phi |n>`, with the squeezing operator
/// `S_phi = exp( (phi/2) e^{-i theta} bb - (phi/2) e^{i theta} b'b' )`
/// built by matrix exponential of the generator.
pub fn state_squeezed_number(space: FockSpace, n: usize, phi: f64, theta: f64) -> Result<QuantumState> {
    let dim = space.n_levels();
    if n >= dim {
        return Err(Error::Range { index: n, n_levels: dim });
    }
    let (b, bd) = ladder_ops(space);
    let half = 0.5 * phi;
    let ph = C64::new(0.0, theta).exp();
    let gen = &(&b * &b).scale(ph.conj() * half) - &(&bd * &bd).scale(ph * half);
    let s = expm(&gen)?;
    // psi = S |n>
    let psi: Vec<C64> = (0..dim).map(|i| s[(i, n)]).collect();
    let rho = ComplexMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
    QuantumState::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_level_annihilator() {
        let (b, _) = ladder_ops(FockSpace::new(2).unwrap());
        assert_eq!(b[(0, 1)], c(1.0, 0.0));
        assert_eq!(b[(0, 0)], c(0.0, 0.0));
        assert_eq!(b[(1, 0)], c(0.0, 0.0));
        assert_eq!(b[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn number_operator_diagonal() {
        let space = FockSpace::new(4).unwrap();
        let (b, bd) = ladder_ops(space);
        let n = &bd * &b;
        for k in 0..4 {
            assert!((n[(k, k)] - c(k as f64, 0.0)).norm() < 1e-15);
        }
        assert!((&n - &number_op(space)).max_abs() < 1e-14);
    }

    #[test]
    fn commutator_truncation_corner() {
        let space = FockSpace::new(10).unwrap();
        let (b, bd) = ladder_ops(space);
        let comm = &(&b * &bd) - &(&bd * &b);
        for k in 0..9 {
            assert!((comm[(k, k)] - c(1.0, 0.0)).norm() < 1e-14);
        }
        // truncation artifact: last diagonal entry is 1 - N
        assert!((comm[(9, 9)] - c(-9.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_bare_oscillator() {
        let params = ModelParams::new(1.5, 0.0, 0.0, 1.0, 0.0).unwrap();
        let h = hamiltonian(&params, FockSpace::new(5).unwrap());
        for k in 0..5 {
            assert!((h[(k, k)] - c(1.5 * k as f64, 0.0)).norm() < 1e-15);
        }
        assert!(h.max_abs() < 6.1); // no off-diagonals
        assert!(h.is_hermitian(1e-15));
    }

    #[test]
    fn hamiltonian_two_photon_element() {
        // <0| (omega/2) bb |2> = (omega/2) sqrt(2)
        let params = ModelParams::new(1.5, 1.0, 0.0, 1.0, 0.0).unwrap();
        let h = hamiltonian(&params, FockSpace::new(3).unwrap());
        assert!((h[(0, 2)] - c(0.5 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(h.is_hermitian(1e-15));
    }

    #[test]
    fn hamiltonian_kerr_diagonal() {
        let u = 0.01;
        let params = ModelParams::new(1.5, 0.0, 0.0, 1.0, u).unwrap();
        let h = hamiltonian(&params, FockSpace::new(6).unwrap());
        for k in 0..6 {
            let kf = k as f64;
            let want = 1.5 * kf + 0.5 * u * kf * (kf - 1.0);
            assert!((h[(k, k)] - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_hermitian_for_all_phases() {
        for theta in [-3.0, -0.5, 0.0, 1.2, 3.14] {
            let params = ModelParams::new(2.0, 1.3, theta, 1.0, 0.02).unwrap();
            let h = hamiltonian(&params, FockSpace::new(12).unwrap());
            assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
        }
    }

    #[test]
    fn quadratures_basic() {
        let space = FockSpace::new(2).unwrap();
        let (x, _) = quadrature_ops(0.0, space);
        let inv = 1.0 / 2f64.sqrt();
        assert!((x[(0, 1)] - c(inv, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(inv, 0.0)).norm() < 1e-15);

        // vacuum variance 1/2 for any theta; commutator corner is i
        for theta in [0.0, 1.0, -2.5] {
            let space = FockSpace::new(8).unwrap();
            let (x, p) = quadrature_ops(theta, space);
            let vac = state_vacuum(space);
            let x2 = vac.expect(&(&x * &x));
            assert!((x2 - c(0.5, 0.0)).norm() < 1e-14);
            let comm = &(&x * &p) - &(&p * &x);
            assert!((comm[(0, 0)] - c(0.0, 1.0)).norm() < 1e-14);
            assert!(x.is_hermitian(1e-14));
            assert!(p.is_hermitian(1e-14));
        }
    }

    #[test]
    fn fock_state_population() {
        let space = FockSpace::new(6).unwrap();
        let s = state_fock(space, 1).unwrap();
        assert!((s.population() - 1.0).abs() < 1e-15);
        assert!((s.purity() - 1.0).abs() < 1e-15);
        assert!(state_fock(space, 6).is_err());
    }

    #[test]
    fn coherent_state_poissonian() {
        let space = FockSpace::new(30).unwrap();
        let alpha = c(1.2, -0.4);
        let s = state_coherent(space, alpha).unwrap();
        let nbar = alpha.norm_sqr();
        assert!((s.population() - nbar).abs() < 1e-10);
        // P(n) = e^{-nbar} nbar^n / n!
        let p2 = s.matrix()[(2, 2)].re;
        let want = (-nbar).exp() * nbar.powi(2) / 2.0;
        assert!((p2 - want).abs() < 1e-12);
    }

    #[test]
    fn squeezed_vacuum_population_and_variances() {
        // phi from delta = 2, omega = 1: phi = ln(3)/4
        let phi = 3f64.ln() / 4.0;
        let space = FockSpace::new(40).unwrap();
        let s = state_squeezed_number(space, 0, phi, 0.0).unwrap();
        let want_pop = phi.sinh().powi(2);
        assert!((s.population() - want_pop).abs() < 1e-9, "{} vs {want_pop}", s.population());

        let (x, p) = quadrature_ops(0.0, space);
        let x2 = s.expect(&(&x * &x)).re;
        let p2 = s.expect(&(&p * &p)).re;
        assert!((x2 - 0.5 * (-2.0 * phi).exp()).abs() < 1e-6);
        assert!((p2 - 0.5 * (2.0 * phi).exp()).abs() < 1e-6);
    }

    #[test]
    fn squeezed_number_population_formula() {
        // <n,phi| b'b |n,phi> = n cosh(2 phi) + sinh^2(phi)
        let space = FockSpace::new(40).unwrap();
        for n in 0..=3usize {
            for phi in [0.1, 0.25] {
                let s = state_squeezed_number(space, n, phi, 0.4).unwrap();
                let want = n as f64 * (2.0 * phi).cosh() + phi.sinh().powi(2);
                assert!(
                    (s.population() - want).abs() < 1e-8,
                    "n={n} phi={phi}: {} vs {want}",
                    s.population()
                );
            }
        }
    }

    #[test]
    fn bogoliubov_level_spacings() {
        // closed system, omega < delta: eigenvalues of H are n*omega_tilde + const
        let params = ModelParams::new(2.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let space = FockSpace::new(60).unwrap();
        let h = hamiltonian(&params, space);
        let mut vals: Vec<f64> = crate::numerics::eigenvalues(&h)
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let omega_tilde = (params.delta * params.delta - params.omega * params.omega).sqrt();
        for n in 0..=5 {
            let spacing = vals[n + 1] - vals[n];
            assert!(
                (spacing - omega_tilde).abs() < 1e-4,
                "spacing {n}: {spacing} vs {omega_tilde}"
            );
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0).is_err()); // gamma = 0
        assert!(ModelParams::new(-1.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 4.0, 1.0, 0.0).is_err()); // |theta| > pi
        assert!(FockSpace::new(1).is_err());
    }
}
