//! Husimi quasiprobability grids and quadrature statistics.

use crate::error::{Error, Result};
use crate::fock::{quadrature_ops, QuantumState};
use crate::numerics::C64;
use rayon::prelude::*;
use serde::Serialize;

/// Husimi values this far below zero are treated as a physicality failure;
/// anything in `[-CLIP_TOL, 0)` is clipped to zero in the output.
pub const CLIP_TOL: f64 = 1e-10;

/// Default extent of the square grid `[-4, 4]^2` and its point count per
/// axis, matching the visual window of the phase-space figures.
pub const DEFAULT_EXTENT: f64 = 4.0;
pub const DEFAULT_POINTS: usize = 201;

/// Rectangular grid in the complex-amplitude plane.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
}

impl GridSpec {
    /// Square grid `[-extent, extent]^2` with `points` samples per axis.
    pub fn symmetric(extent: f64, points: usize) -> Result<Self> {
        if !(extent > 0.0) || points < 8 {
            return Err(Error::InvalidArgument(
                "grid needs a positive extent and at least 8 points per axis".into(),
            ));
        }
        let axis = crate::series::linspace(-extent, extent, points);
        Ok(GridSpec { re_axis: axis.clone(), im_axis: axis })
    }

    /// Size the grid from the state's quadrature spread: six standard
    /// deviations of the wider quadrature around the mean, but never
    /// smaller than the default window.
    pub fn auto_from_state(rho: &QuantumState, theta: f64) -> Result<Self> {
        let stats = quadrature_stats(rho, theta);
        let reach = (stats.mean_x.abs() + stats.mean_p.abs()) / 2f64.sqrt()
            + 6.0 * stats.var_x.max(stats.var_p).sqrt() / 2f64.sqrt();
        Self::symmetric(reach.max(DEFAULT_EXTENT), DEFAULT_POINTS)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::symmetric(DEFAULT_EXTENT, DEFAULT_POINTS).unwrap()
    }
}

/// `Q(alpha) = <alpha| rho |alpha> / pi` sampled on a grid, with its
/// Riemann-sum normalization.  `values` is row-major over
/// `(im_alpha, re_alpha)`.
#[derive(Clone, Debug, Serialize)]
pub struct HusimiGrid {
    pub re_alpha: Vec<f64>,
    pub im_alpha: Vec<f64>,
    pub values: Vec<f64>,
    pub integral: f64,
    /// Grid points far enough out that the truncated coherent expansion
    /// carries noticeable weight beyond the ladder (`|alpha|^2 / N > 0.1`);
    /// a coverage warning, not a correction (the plain truncated overlap is
    /// kept, since it is what integrates to exactly 1 by completeness).
    pub edge_points: usize,
    /// Tiny negative values clipped to zero.
    pub clipped_points: usize,
}

impl HusimiGrid {
    pub fn value(&self, i_im: usize, i_re: usize) -> f64 {
        self.values[i_im * self.re_alpha.len() + i_re]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Means, variances and covariance of the distribution over the
    /// `(Re alpha, Im alpha)` plane.
    pub fn covariance(&self) -> GridMoments {
        let dx = self.re_alpha[1] - self.re_alpha[0];
        let dy = self.im_alpha[1] - self.im_alpha[0];
        let w = dx * dy;
        let mut mass = 0.0;
        let (mut mx, mut my) = (0.0, 0.0);
        for (iy, y) in self.im_alpha.iter().enumerate() {
            for (ix, x) in self.re_alpha.iter().enumerate() {
                let q = self.value(iy, ix) * w;
                mass += q;
                mx += q * x;
                my += q * y;
            }
        }
        mx /= mass;
        my /= mass;
        let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
        for (iy, y) in self.im_alpha.iter().enumerate() {
            for (ix, x) in self.re_alpha.iter().enumerate() {
                let q = self.value(iy, ix) * w / mass;
                vxx += q * (x - mx) * (x - mx);
                vyy += q * (y - my) * (y - my);
                vxy += q * (x - mx) * (y - my);
            }
        }
        GridMoments { mean_re: mx, mean_im: my, var_re: vxx, var_im: vyy, cov: vxy }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridMoments {
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
    pub cov: f64,
}

impl GridMoments {
    /// Principal variances (eigenvalues of the 2x2 covariance matrix),
    /// major first.
    pub fn principal_variances(&self) -> (f64, f64) {
        let tr = self.var_re + self.var_im;
        let det = self.var_re * self.var_im - self.cov * self.cov;
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        (0.5 * tr + disc, 0.5 * tr - disc)
    }
}

/// Evaluate the Husimi function of `rho` on the grid.  When the Riemann sum
/// misses unity by more than 1e-2 the grid is enlarged (up to three times)
/// before giving up with a resolution error.
pub fn husimi(rho: &QuantumState, spec: &GridSpec) -> Result<HusimiGrid> {
    let mut current = spec.clone();
    for attempt in 0..5 {
        let grid = husimi_once(rho, &current)?;
        if (grid.integral - 1.0).abs() <= 1e-2 {
            return Ok(grid);
        }
        if attempt == 4 {
            return Err(Error::Resolution { integral: grid.integral });
        }
        // widen by 1.5x, growing the point count to keep the density
        let old_extent = current.re_axis.last().unwrap().abs();
        let extent = 1.5 * old_extent;
        let points = ((current.re_axis.len() as f64) * 1.5).ceil() as usize | 1;
        current = GridSpec::symmetric(extent, points)?;
    }
    unreachable!()
}

fn husimi_once(rho: &QuantumState, spec: &GridSpec) -> Result<HusimiGrid> {
    if spec.re_axis.len() < 2 || spec.im_axis.len() < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2x2 points".into()));
    }
    let n = rho.n_levels();
    let rho_m = rho.matrix();
    let rows: Vec<Result<(Vec<f64>, usize, usize)>> = spec
        .im_alpha_par()
        .map(|&y| -> Result<(Vec<f64>, usize, usize)> {
            let mut row = Vec::with_capacity(spec.re_axis.len());
            let mut renorm = 0usize;
            let mut clipped = 0usize;
            let mut amps = vec![C64::new(0.0, 0.0); n];
            for &x in &spec.re_axis {
                let alpha = C64::new(x, y);
                coherent_amplitudes(alpha, &mut amps);
                if alpha.norm_sqr() / n as f64 > 0.1 {
                    renorm += 1;
                }
                // q = <c| rho |c> / pi
                let rc = rho_m.apply(&amps);
                let mut q = crate::numerics::vec_dot(&amps, &rc).re / std::f64::consts::PI;
                if q < 0.0 {
                    if q < -CLIP_TOL {
                        return Err(Error::Physicality(format!(
                            "Husimi value {q:.3e} at alpha = {alpha}"
                        )));
                    }
                    q = 0.0;
                    clipped += 1;
                }
                row.push(q);
            }
            Ok((row, renorm, clipped))
        })
        .collect();

    let mut values = Vec::with_capacity(spec.re_axis.len() * spec.im_axis.len());
    let mut edge_points = 0;
    let mut clipped_points = 0;
    for r in rows {
        let (row, renorm, clipped) = r?;
        values.extend(row);
        edge_points += renorm;
        clipped_points += clipped;
    }
    let dx = spec.re_axis[1] - spec.re_axis[0];
    let dy = spec.im_axis[1] - spec.im_axis[0];
    let integral: f64 = values.iter().sum::<f64>() * dx * dy;
    Ok(HusimiGrid {
        re_alpha: spec.re_axis.clone(),
        im_alpha: spec.im_axis.clone(),
        values,
        integral,
        edge_points,
        clipped_points,
    })
}

impl GridSpec {
    fn im_alpha_par(&self) -> rayon::slice::Iter<'_, f64> {
        self.im_axis.par_iter()
    }
}

/// Fock amplitudes of the (truncated) coherent state, by the stable
/// recurrence `c_k = c_{k-1} alpha / sqrt(k)`; no factorials appear, so
/// this is overflow-free far past N = 200.
fn coherent_amplitudes(alpha: C64, out: &mut [C64]) {
    out[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 1..out.len() {
        out[k] = out[k - 1] * alpha / C64::new((k as f64).sqrt(), 0.0);
    }
}

/// Quadrature means, variances and the uncertainty product for a state.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadratureStats {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `sigma_X * sigma_P`, bounded below by 1/2.
    pub uncertainty: f64,
}

pub fn quadrature_stats(rho: &QuantumState, theta: f64) -> QuadratureStats {
    let space = crate::fock::FockSpace::new(rho.n_levels()).expect("state has >= 2 levels");
    let (x, p) = quadrature_ops(theta, space);
    let mean_x = rho.expect(&x).re;
    let mean_p = rho.expect(&p).re;
    let var_x = rho.expect(&(&x * &x)).re - mean_x * mean_x;
    let var_p = rho.expect(&(&p * &p)).re - mean_p * mean_p;
    QuadratureStats { mean_x, mean_p, var_x, var_p, uncertainty: (var_x * var_p).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{state_coherent, state_fock, state_squeezed_number, state_vacuum, FockSpace};

    #[test]
    fn vacuum_gaussian() {
        let space = FockSpace::new(30).unwrap();
        let vac = state_vacuum(space);
        let grid = husimi(&vac, &GridSpec::default()).unwrap();
        // max Q = 1/pi at the origin
        let max = grid.max_value();
        assert!((max - 1.0 / std::f64::consts::PI).abs() < 1e-4, "max {max}");
        let mid = grid.im_alpha.len() / 2;
        assert!((grid.value(mid, mid) - max).abs() < 1e-12);
        assert!((grid.integral - 1.0).abs() < 1e-3);
        assert_eq!(grid.clipped_points, 0);
        // Q(alpha) = e^{-|alpha|^2}/pi
        let q = grid.value(mid, mid + 25); // alpha = 1.0
        assert!((q - (-1.0f64).exp() / std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn fock_one_is_a_ring() {
        let space = FockSpace::new(30).unwrap();
        let s = state_fock(space, 1).unwrap();
        let grid = husimi(&s, &GridSpec::default()).unwrap();
        let mid = grid.im_alpha.len() / 2;
        assert!(grid.value(mid, mid) < 1e-14, "Q(0) = {}", grid.value(mid, mid));
        // ring maximum |alpha| = 1 with Q = e^{-1}/pi
        let ring = grid.value(mid, mid + 25);
        assert!((ring - (-1.0f64).exp() / std::f64::consts::PI).abs() < 1e-6);
        assert!((grid.integral - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coherent_state_peaks_at_alpha() {
        let space = FockSpace::new(40).unwrap();
        let s = state_coherent(space, C64::new(1.6, -0.8)).unwrap();
        let grid = husimi(&s, &GridSpec::default()).unwrap();
        let (mut best, mut at) = (0.0, (0, 0));
        for iy in 0..grid.im_alpha.len() {
            for ix in 0..grid.re_alpha.len() {
                if grid.value(iy, ix) > best {
                    best = grid.value(iy, ix);
                    at = (iy, ix);
                }
            }
        }
        assert!((grid.re_alpha[at.1] - 1.6).abs() < 0.05);
        assert!((grid.im_alpha[at.0] + 0.8).abs() < 0.05);
        assert!((best - 1.0 / std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn squeezed_state_is_anisotropic() {
        let space = FockSpace::new(40).unwrap();
        let s = state_squeezed_number(space, 0, 0.6, 0.0).unwrap();
        // wide window so the broad quadrature's tails do not bias the moments
        let grid = husimi(&s, &GridSpec::symmetric(5.5, 276).unwrap()).unwrap();
        let m = grid.covariance();
        let (major, minor) = m.principal_variances();
        // Husimi covariances are the quadrature variances plus the vacuum
        // half: (e^{1.2} + 1)/2 vs (e^{-1.2} + 1)/2, both over 2
        let want_major = 0.5 * ((1.2f64).exp() + 1.0) / 2.0;
        let want_minor = 0.5 * ((-1.2f64).exp() + 1.0) / 2.0;
        assert!((major - want_major).abs() < 1e-3, "{major} vs {want_major}");
        assert!((minor - want_minor).abs() < 1e-3, "{minor} vs {want_minor}");
    }

    #[test]
    fn auto_extension_recovers_displaced_state() {
        let space = FockSpace::new(60).unwrap();
        let s = state_coherent(space, C64::new(3.2, 0.0)).unwrap();
        // initial window much too small; must auto-extend to capture it
        let grid = husimi(&s, &GridSpec::symmetric(1.5, 31).unwrap()).unwrap();
        assert!((grid.integral - 1.0).abs() < 1e-2);
        assert!(grid.re_alpha.last().unwrap() > &3.0);
    }

    #[test]
    fn edge_coverage_counted_for_far_grid_points() {
        let space = FockSpace::new(12).unwrap();
        let vac = state_vacuum(space);
        let grid = husimi(&vac, &GridSpec::symmetric(4.0, 41).unwrap()).unwrap();
        // points with |alpha|^2 > 1.2 are flagged; the values themselves
        // keep the plain truncated overlap, so the integral stays at 1
        assert!(grid.edge_points > 0);
        assert!((grid.integral - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quadrature_stats_vacuum_and_squeezed() {
        let space = FockSpace::new(40).unwrap();
        let vac = state_vacuum(space);
        let st = quadrature_stats(&vac, 0.0);
        assert!(st.mean_x.abs() < 1e-12 && st.mean_p.abs() < 1e-12);
        assert!((st.var_x - 0.5).abs() < 1e-12);
        assert!((st.var_p - 0.5).abs() < 1e-12);
        assert!((st.uncertainty - 0.5).abs() < 1e-12);

        let phi = 0.4;
        let s = state_squeezed_number(space, 0, phi, 0.0).unwrap();
        let st = quadrature_stats(&s, 0.0);
        assert!((st.var_x - 0.5 * (-2.0 * phi).exp()).abs() < 1e-8);
        assert!((st.var_p - 0.5 * (2.0 * phi).exp()).abs() < 1e-8);
        assert!(st.uncertainty >= 0.5 - 1e-9);
    }
}
