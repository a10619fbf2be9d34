//! Closed-form results for the first and second moments of the driven,
//! damped oscillator: dynamical matrices with their eigen pairs, regime
//! classification around the exceptional and critical points, transient and
//! steady populations, the coherence functions `g1`/`g2`, the optical
//! spectrum with its two-branch decomposition, steady quadrature variances,
//! and the semiclassical Kerr population.
//!
//! Everything in here is exact algebra evaluated in floating point; the
//! matching numerical results live in [`crate::lindblad`].

use crate::error::{Error, Result};
use crate::fock::ModelParams;
use crate::numerics::{eig_general, normalize_phase, vector_rank, C64, ComplexMatrix, EigenSystem};
use serde::Serialize;

/// Exact-comparison tolerance (relative to `gamma`) for sitting *at* the
/// exceptional or critical point.  Nearby parameters take the generic
/// branch; the removable singularities there are benign in f64.
pub const POINT_TOL: f64 = 1e-12;

/// Analytic values larger than this are reported as unbounded rather than
/// returned, so downstream output stays finite and parseable.
pub const DIVERGENCE_CAP: f64 = 1e9;

fn capped(value: f64) -> Result<f64> {
    if value.abs() > DIVERGENCE_CAP || !value.is_finite() {
        Err(Error::Unbounded { value, cap: DIVERGENCE_CAP })
    } else {
        Ok(value)
    }
}

/// The derived frequency/rate scales of the model.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivedScales {
    /// `sqrt(delta^2 - omega^2)`, defined for `omega <= delta`.
    pub omega_tilde: Option<f64>,
    /// `sqrt(omega^2 - delta^2)`, defined for `omega >= delta`.
    pub big_gamma: Option<f64>,
    /// Exceptional point `omega_ep = delta`.
    pub omega_ep: f64,
    /// Critical amplitude `omega_c = sqrt(delta^2 + (gamma/2)^2)`.
    pub omega_c: f64,
    /// Squeezing parameter `ln((delta+omega)/(delta-omega))/4`, only below
    /// the EP (the closed system collapses spectrally past it).
    pub phi: Option<f64>,
}

impl DerivedScales {
    /// The squeezing parameter, or a domain error at/above the EP.
    pub fn phi(&self) -> Result<f64> {
        self.phi.ok_or_else(|| {
            Error::Domain("squeezing parameter undefined for omega >= delta".into())
        })
    }
}

pub fn derived_scales(params: &ModelParams) -> DerivedScales {
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    let at_ep = (om - d).abs() <= POINT_TOL * g;
    let diff = d * d - om * om;
    let omega_tilde = if at_ep {
        Some(0.0)
    } else if om < d {
        Some(diff.sqrt())
    } else {
        None
    };
    let big_gamma = if at_ep {
        Some(0.0)
    } else if om > d {
        Some((-diff).sqrt())
    } else {
        None
    };
    let phi = if !at_ep && om < d { Some(((d + om) / (d - om)).ln() / 4.0) } else { None };
    DerivedScales {
        omega_tilde,
        big_gamma,
        omega_ep: d,
        omega_c: (d * d + 0.25 * g * g).sqrt(),
        phi,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    BelowEp,
    AtEp,
    AboveEp,
    AtCritical,
    Unstable,
}

/// Where on the drive axis the parameters sit, with signed distances to the
/// two special points (units of `gamma`).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub dist_ep: f64,
    pub dist_critical: f64,
}

pub fn classify_regime(params: &ModelParams) -> Regime {
    let scales = derived_scales(params);
    let g = params.gamma;
    let dist_ep = params.omega - scales.omega_ep;
    let dist_critical = params.omega - scales.omega_c;
    let tag = if dist_ep.abs() <= POINT_TOL * g {
        RegimeTag::AtEp
    } else if dist_critical.abs() <= POINT_TOL * g {
        RegimeTag::AtCritical
    } else if params.omega < scales.omega_ep {
        RegimeTag::BelowEp
    } else if params.omega < scales.omega_c {
        RegimeTag::AboveEp
    } else {
        RegimeTag::Unstable
    };
    Regime { tag, dist_ep, dist_critical }
}

/// First-moment dynamical system `i d/dt (b, b') = H2 (b, b')`.
#[derive(Clone, Debug)]
pub struct FirstMomentSystem {
    pub matrix: ComplexMatrix,
    /// Closed-form eigenfrequencies `(omega_plus, omega_minus)`.
    pub values: [C64; 2],
    /// Closed-form eigenvectors, unit-normalized with the crate phase
    /// convention; equal (coalesced) at the EP.
    pub vectors: [Vec<C64>; 2],
    /// Cross-check: numeric decomposition of `matrix`.
    pub numeric: EigenSystem,
}

impl FirstMomentSystem {
    /// `|<alpha_plus | alpha_minus>|`; tends to 1 at the EP.
    pub fn eigenvector_overlap(&self) -> f64 {
        crate::numerics::overlap(&self.vectors[0], &self.vectors[1])
    }

    /// Splitting `|omega_plus - omega_minus|` between the two branches.
    pub fn eigenvalue_splitting(&self) -> f64 {
        (self.values[0] - self.values[1]).norm()
    }
}

pub fn first_moment_system(params: &ModelParams) -> Result<FirstMomentSystem> {
    params.validate()?;
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    let ph = C64::new(0.0, params.theta).exp();
    let matrix = ComplexMatrix::from_rows(vec![
        vec![C64::new(d, -0.5 * g), om * ph],
        vec![C64::new(-om, 0.0) * ph.conj(), C64::new(-d, -0.5 * g)],
    ]);

    let regime = classify_regime(params).tag;
    let scales = derived_scales(params);
    let half_decay = C64::new(0.0, -0.5 * g);
    let values = match regime {
        RegimeTag::BelowEp => {
            let wt = scales.omega_tilde.unwrap();
            [half_decay + wt, half_decay - wt]
        }
        RegimeTag::AtEp => [half_decay, half_decay],
        _ => {
            let gg = scales.big_gamma.unwrap();
            [C64::new(0.0, -(0.5 * g + gg)), C64::new(0.0, -(0.5 * g - gg))]
        }
    };

    let vectors = if om == 0.0 {
        // diagonal matrix; the closed-form vectors have an omega in the
        // denominator, so fall back to the basis
        [vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]]
    } else {
        let top = |sign: f64| -> C64 {
            match regime {
                RegimeTag::BelowEp | RegimeTag::AtEp => {
                    C64::new((d + sign * scales.omega_tilde.unwrap_or(0.0)) / om, 0.0)
                }
                _ => C64::new(d / om, -sign * scales.big_gamma.unwrap() / om),
            }
        };
        let mut plus = vec![top(1.0), -ph.conj()];
        let mut minus = vec![top(-1.0), -ph.conj()];
        normalize_phase(&mut plus);
        normalize_phase(&mut minus);
        [plus, minus]
    };

    let numeric = eig_general(&matrix)?;
    Ok(FirstMomentSystem { matrix, values, vectors, numeric })
}

/// Second-moment system `i d/dt Psi = M3 Psi + P` with
/// `Psi = (<b'b>, <bb>, <b'b'>)`.
#[derive(Clone, Debug)]
pub struct SecondMomentSystem {
    pub matrix: ComplexMatrix,
    pub drive: Vec<C64>,
    /// Closed-form eigenvalues `(lambda_plus, lambda_minus, lambda_3)`.
    pub values: [C64; 3],
    /// Closed-form eigenvectors (unnormalized, as derived), same order.
    pub vectors_raw: [Vec<C64>; 3],
    pub numeric: EigenSystem,
}

impl SecondMomentSystem {
    /// Numeric rank of the eigenvector matrix; drops to 1 at the
    /// third-order EP.
    pub fn eigenvector_rank(&self, rtol: f64) -> usize {
        vector_rank(&self.numeric.vectors, rtol)
    }

    /// Steady state `-M3^-1 P`, i.e. `(<b'b>, <bb>, <b'b'>)` at long times.
    pub fn steady_vector(&self) -> Result<Vec<C64>> {
        let neg: Vec<C64> = self.drive.iter().map(|z| -z).collect();
        crate::numerics::solve_linear(&self.matrix, &neg)
    }
}

pub fn second_moment_system(params: &ModelParams) -> Result<SecondMomentSystem> {
    params.validate()?;
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    let ph = C64::new(0.0, params.theta).exp();
    let zero = C64::new(0.0, 0.0);
    let matrix = ComplexMatrix::from_rows(vec![
        vec![C64::new(0.0, -g), -om * ph.conj(), om * ph],
        vec![2.0 * om * ph, C64::new(2.0 * d, -g), zero],
        vec![-2.0 * om * ph.conj(), zero, C64::new(-2.0 * d, -g)],
    ]);
    let drive = vec![zero, om * ph, -om * ph.conj()];

    let regime = classify_regime(params).tag;
    let scales = derived_scales(params);
    let lam3 = C64::new(0.0, -g);
    let values = match regime {
        RegimeTag::BelowEp => {
            let two_wt = 2.0 * scales.omega_tilde.unwrap();
            [lam3 + two_wt, lam3 - two_wt, lam3]
        }
        RegimeTag::AtEp => [lam3, lam3, lam3],
        _ => {
            let two_gg = 2.0 * scales.big_gamma.unwrap();
            [C64::new(0.0, -(g + two_gg)), C64::new(0.0, -(g - two_gg)), lam3]
        }
    };

    // beta_3 = (-delta, Om e^{i th}, Om e^{-i th});
    // beta_pm = (-Om(delta pm wt), [2 delta (delta pm wt) - Om^2] e^{i th},
    //            Om^2 e^{-i th}).  Above the EP the branch pairing with the
    //            fast/slow eigenvalues requires the continuation wt -> -i Gamma.
    let wt: C64 = match regime {
        RegimeTag::BelowEp | RegimeTag::AtEp => C64::new(scales.omega_tilde.unwrap_or(0.0), 0.0),
        _ => C64::new(0.0, -scales.big_gamma.unwrap()),
    };
    let beta = |sign: f64| -> Vec<C64> {
        let root = C64::new(d, 0.0) + sign * wt;
        vec![
            -om * root,
            (2.0 * d * root - om * om) * ph,
            C64::new(om * om, 0.0) * ph.conj(),
        ]
    };
    let vectors_raw = if om == 0.0 {
        [
            vec![zero, C64::new(1.0, 0.0), zero],
            vec![zero, zero, C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), zero, zero],
        ]
    } else {
        [
            beta(1.0),
            beta(-1.0),
            vec![C64::new(-d, 0.0), om * ph, om * ph.conj()],
        ]
    };

    let numeric = eig_general(&matrix)?;
    Ok(SecondMomentSystem { matrix, drive, values, vectors_raw, numeric })
}

/// Both moment systems together.
#[derive(Clone, Debug)]
pub struct MomentSystem {
    pub first: FirstMomentSystem,
    pub second: SecondMomentSystem,
}

pub fn moment_system(params: &ModelParams) -> Result<MomentSystem> {
    Ok(MomentSystem { first: first_moment_system(params)?, second: second_moment_system(params)? })
}

/// Populations `n(t)` obtained by numerically integrating the second-moment
/// system `i dPsi/dt = M3 Psi + P` from `Psi(0) = (n0, 0, 0)`.  This is a
/// truncation-free numerical route, independent of the closed-form
/// branches, used to cross-check them.
pub fn population_by_moment_ode(
    params: &ModelParams,
    n0: f64,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    let sys = second_moment_system(params)?;
    let m = &sys.matrix;
    let p = &sys.drive;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        for i in 0..3 {
            let mut acc = p[i];
            for j in 0..3 {
                acc += m[(i, j)] * y[j];
            }
            dy[i] = minus_i * acc;
        }
    };
    let y0 = [C64::new(n0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let sol = crate::numerics::integrate_ode(
        rhs,
        &y0,
        t_grid,
        crate::numerics::DEFAULT_RTOL,
        crate::numerics::DEFAULT_ATOL,
    )?;
    Ok(sol.states.iter().map(|s| s[0].re).collect())
}

/// Steady population `n(inf) = omega^2 / (2 (omega_c^2 - omega^2))`.
pub fn population_steady(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let scales = derived_scales(params);
    if params.omega >= scales.omega_c - POINT_TOL * params.gamma {
        return Err(Error::NoSteadyState { omega: params.omega, omega_c: scales.omega_c });
    }
    let oc2 = scales.omega_c * scales.omega_c;
    capped(0.5 * params.omega * params.omega / (oc2 - params.omega * params.omega))
}

/// Transient mean population `n(t)` from initial value `n0`, by the
/// closed-form branch for the current regime (damped Rabi oscillations
/// below the EP, hyperbolic envelopes above it, damped polynomial at it).
pub fn population_transient(params: &ModelParams, n0: f64, t: f64) -> Result<f64> {
    params.validate()?;
    if t < 0.0 || n0 < 0.0 {
        return Err(Error::InvalidArgument("need t >= 0 and n0 >= 0".into()));
    }
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    let regime = classify_regime(params).tag;
    let scales = derived_scales(params);

    let value = match regime {
        RegimeTag::AtEp => {
            // n_ep(t) = 2 d^2/g^2 + { n0 + 2 d^2/g^2 (g t [n0 g t - 1] - 1) } e^{-g t}
            let a = 2.0 * d * d / (g * g);
            let gt = g * t;
            a + (n0 + a * (gt * (n0 * gt - 1.0) - 1.0)) * (-gt).exp()
        }
        RegimeTag::BelowEp => {
            let wt = scales.omega_tilde.unwrap();
            let dd = wt * wt + 0.25 * g * g;
            let n_inf = 0.5 * om * om / dd;
            let osc = 4.0 * n0 * d * d * dd
                - g * wt * om * om * (2.0 * wt * t).sin()
                - 2.0 * om * om * (2.0 * n0 * dd + wt * wt) * (2.0 * wt * t).cos();
            n_inf + osc / (4.0 * wt * wt * dd) * (-g * t).exp()
        }
        _ => {
            // hyperbolics recombined into plain exponentials so that large
            // Gamma*t cannot overflow before the decay factor is applied
            let gg = scales.big_gamma.unwrap();
            let dd = 0.25 * g * g - gg * gg;
            let n_inf = 0.5 * om * om / dd;
            let ep = ((2.0 * gg - g) * t).exp();
            let em = (-(2.0 * gg + g) * t).exp();
            let sinh_term = 0.5 * (ep - em);
            let cosh_term = 0.5 * (ep + em);
            let brace = 4.0 * n0 * d * d * dd * (-g * t).exp()
                + g * gg * om * om * sinh_term
                - 2.0 * om * om * (2.0 * n0 * dd - gg * gg) * cosh_term;
            n_inf - brace / (4.0 * gg * gg * dd)
        }
    };
    capped(value)
}

/// First-order coherence `g1(tau)`; equals 1 for all delays exactly at the
/// critical drive, and diverges beyond it.
pub fn g1(params: &ModelParams, tau: f64) -> Result<f64> {
    params.validate()?;
    if tau < 0.0 {
        return Err(Error::InvalidArgument("delay tau must be >= 0".into()));
    }
    let (om, g) = (params.omega, params.gamma);
    let scales = derived_scales(params);
    let regime = classify_regime(params).tag;
    if matches!(regime, RegimeTag::AtCritical) {
        return Ok(1.0);
    }
    if om > scales.omega_c {
        return Err(Error::NoSteadyState { omega: om, omega_c: scales.omega_c });
    }
    let value = match regime {
        RegimeTag::AtEp => (1.0 + 0.5 * g * tau) * (-0.5 * g * tau).exp(),
        RegimeTag::BelowEp => {
            let wt = scales.omega_tilde.unwrap();
            ((wt * tau).cos() + 0.5 * g / wt * (wt * tau).sin()) * (-0.5 * g * tau).exp()
        }
        _ => {
            let gg = scales.big_gamma.unwrap();
            let ep = ((gg - 0.5 * g) * tau).exp();
            let em = (-(gg + 0.5 * g) * tau).exp();
            0.5 * (ep + em) + 0.25 * g / gg * (ep - em)
        }
    };
    capped(value)
}

/// Zero-delay second-order coherence `g2(0) = 2 + (omega_c/omega)^2`.
pub fn g2_zero(params: &ModelParams) -> Result<f64> {
    g2(params, 0.0)
}

/// Second-order coherence `g2(tau)`; equals 3 for all delays exactly at the
/// critical drive.
pub fn g2(params: &ModelParams, tau: f64) -> Result<f64> {
    params.validate()?;
    if tau < 0.0 {
        return Err(Error::InvalidArgument("delay tau must be >= 0".into()));
    }
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    if om == 0.0 {
        return Err(Error::UndefinedNormalization(
            "g2 needs omega > 0 (zero steady population)".into(),
        ));
    }
    let scales = derived_scales(params);
    let regime = classify_regime(params).tag;
    if matches!(regime, RegimeTag::AtCritical) {
        return Ok(3.0);
    }
    if om > scales.omega_c {
        return Err(Error::NoSteadyState { omega: om, omega_c: scales.omega_c });
    }
    let value = match regime {
        RegimeTag::AtEp => {
            let r = 0.5 * g / d;
            let q = 2.0 + g * tau;
            1.0 + (r * r + 0.5 * q * q) * (-g * tau).exp()
        }
        RegimeTag::BelowEp => {
            let wt = scales.omega_tilde.unwrap();
            let num = d * d * (4.0 * wt * wt + g * g)
                + om * om
                    * ((4.0 * wt * wt - g * g) * (2.0 * wt * tau).cos()
                        + 4.0 * g * wt * (2.0 * wt * tau).sin());
            1.0 + num / (4.0 * wt * wt * om * om) * (-g * tau).exp()
        }
        _ => {
            let gg = scales.big_gamma.unwrap();
            let ep = ((2.0 * gg - g) * tau).exp();
            let em = (-(2.0 * gg + g) * tau).exp();
            let cosh_term = 0.5 * (ep + em);
            let sinh_term = 0.5 * (ep - em);
            let num = d * d * (4.0 * gg * gg - g * g) * (-g * tau).exp()
                + om * om * ((4.0 * gg * gg + g * g) * cosh_term + 4.0 * g * gg * sinh_term);
            1.0 + num / (4.0 * gg * gg * om * om)
        }
    };
    capped(value)
}

/// One spectral sample: the total density and its two-branch decomposition.
/// The branches are quasi-spectral weights (one carries negative weight
/// `1/2 - gamma/(4 Gamma)` above the EP); their sum is the physical,
/// non-negative density.  Exactly at the EP the branches coincide and each
/// is reported as half the total.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumPoint {
    pub total: f64,
    pub plus: f64,
    pub minus: f64,
}

/// Optical spectrum `S(omega)` (normalized so its full integral is 1).
pub fn spectrum(params: &ModelParams, omega: f64) -> Result<SpectrumPoint> {
    params.validate()?;
    let (om, g) = (params.omega, params.gamma);
    let scales = derived_scales(params);
    let regime = classify_regime(params).tag;
    if om >= scales.omega_c - POINT_TOL * g {
        return Err(Error::NoSteadyState { omega: om, omega_c: scales.omega_c });
    }
    let pi = std::f64::consts::PI;
    let point = match regime {
        RegimeTag::AtEp => {
            let hg = 0.5 * g;
            let total = 2.0 / pi * hg.powi(3) / (hg * hg + omega * omega).powi(2);
            SpectrumPoint { total, plus: 0.5 * total, minus: 0.5 * total }
        }
        RegimeTag::BelowEp => {
            let wt = scales.omega_tilde.unwrap();
            let hg2 = 0.25 * g * g;
            let plus = g / (4.0 * pi * wt) * (2.0 * wt - omega) / (hg2 + (omega - wt).powi(2));
            let minus = g / (4.0 * pi * wt) * (2.0 * wt + omega) / (hg2 + (omega + wt).powi(2));
            let total = g / pi * (wt * wt + hg2)
                / ((hg2 + (omega + wt).powi(2)) * (hg2 + (omega - wt).powi(2)));
            SpectrumPoint { total, plus, minus }
        }
        _ => {
            let gg = scales.big_gamma.unwrap();
            let narrow = 0.5 * (g - 2.0 * gg);
            let broad = 0.5 * (g + 2.0 * gg);
            let w_plus = 0.5 + 0.25 * g / gg;
            let w_minus = 0.5 - 0.25 * g / gg;
            let plus = w_plus / pi * narrow / (narrow * narrow + omega * omega);
            let minus = w_minus / pi * broad / (broad * broad + omega * omega);
            SpectrumPoint { total: plus + minus, plus, minus }
        }
    };
    capped(point.total)?;
    Ok(point)
}

/// Steady quadrature variances `(sigma_X^2, sigma_P^2)`.
pub fn quadrature_variances_steady(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let (d, om, g) = (params.delta, params.omega, params.gamma);
    let scales = derived_scales(params);
    if om >= scales.omega_c - POINT_TOL * g {
        return Err(Error::NoSteadyState { omega: om, omega_c: scales.omega_c });
    }
    let oc2 = scales.omega_c * scales.omega_c;
    let den = oc2 - om * om;
    let sx = capped(0.5 * (oc2 - om * d) / den)?;
    let sp = capped(0.5 * (oc2 + om * d) / den)?;
    Ok((sx, sp))
}

/// Location and value of the steady-state position-variance minimum:
/// `omega* = omega_c (omega_c - gamma/2)/delta`,
/// `min sigma_X^2 = (1 + gamma/(2 omega_c))/4`.
pub fn min_position_variance(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    if params.delta <= 0.0 {
        return Err(Error::Domain("variance minimum needs delta > 0".into()));
    }
    let scales = derived_scales(params);
    let omega_at_min = scales.omega_c * (scales.omega_c - 0.5 * params.gamma) / params.delta;
    let value = 0.25 * (1.0 + 0.5 * params.gamma / scales.omega_c);
    Ok((omega_at_min, value))
}

/// Semiclassical steady population of the Kerr oscillator,
/// `n_I(inf) = (sqrt(delta^2 + omega^2 - omega_c^2) - delta)/u`,
/// defined for `u > 0` and drives beyond the critical amplitude.
pub fn semiclassical_kerr_population(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.u <= 0.0 {
        return Err(Error::Domain("semiclassical branch needs u > 0".into()));
    }
    let scales = derived_scales(params);
    if params.omega <= scales.omega_c {
        return Err(Error::Domain(format!(
            "semiclassical branch absent: omega {} <= omega_c {}",
            params.omega, scales.omega_c
        )));
    }
    let inside = params.delta * params.delta + params.omega * params.omega
        - scales.omega_c * scales.omega_c;
    capped((inside.sqrt() - params.delta) / params.u)
}
