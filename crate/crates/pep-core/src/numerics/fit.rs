//! Least-squares fits of the scaling laws used by the gap study, done as
//! linear regression on log-transformed data.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FitModel {
    /// `y = A / x^B`
    Power,
    /// `y = A / B^x`
    ExponentialDecay,
    /// `y = A * B^x`
    ExponentialGrowth,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub a: f64,
    pub b: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
}

/// Fit `ys` against `xs` under the chosen model.  All `ys` must be positive
/// (the transforms take logarithms) and at least three points are required.
pub fn least_squares_fit(model: FitModel, xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!(
            "xs has {} points but ys has {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 data points".into()));
    }
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Domain("fit data must be strictly positive".into()));
    }
    if xs.iter().any(|&x| !x.is_finite()) || matches!(model, FitModel::Power) && xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("fit abscissae invalid for this model".into()));
    }

    let tx: Vec<f64> = match model {
        FitModel::Power => xs.iter().map(|x| x.ln()).collect(),
        _ => xs.to_vec(),
    };
    let ty: Vec<f64> = ys.iter().map(|y| y.ln()).collect();

    let (slope, intercept) = linear_regression(&tx, &ty);
    let (a, b) = match model {
        FitModel::Power => (intercept.exp(), -slope),
        FitModel::ExponentialDecay => (intercept.exp(), (-slope).exp()),
        FitModel::ExponentialGrowth => (intercept.exp(), slope.exp()),
    };
    let residual = {
        let ss: f64 = tx
            .iter()
            .zip(&ty)
            .map(|(&x, &y)| {
                let d = y - (slope * x + intercept);
                d * d
            })
            .sum();
        (ss / tx.len() as f64).sqrt()
    };
    Ok(FitResult { model, a, b, residual })
}

/// Per-point absolute log-residuals (used to drop finite-size outliers).
pub fn log_residuals(fit: &FitResult, xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let pred = match fit.model {
                FitModel::Power => fit.a.ln() - fit.b * x.ln(),
                FitModel::ExponentialDecay => fit.a.ln() - x * fit.b.ln(),
                FitModel::ExponentialGrowth => fit.a.ln() + x * fit.b.ln(),
            };
            (y.ln() - pred).abs()
        })
        .collect()
}

fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_power_self_fit() {
        let xs: Vec<f64> = (10..=40).step_by(5).map(|n| n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|n| 1.505 / n.powf(0.933)).collect();
        let fit = least_squares_fit(FitModel::Power, &xs, &ys).unwrap();
        assert!((fit.a - 1.505).abs() < 1e-10);
        assert!((fit.b - 0.933).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn noiseless_exponential_self_fit() {
        let xs: Vec<f64> = (10..=40).step_by(5).map(|n| n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|n| 1941.0 / 1.230f64.powf(*n)).collect();
        let fit = least_squares_fit(FitModel::ExponentialDecay, &xs, &ys).unwrap();
        assert!((fit.a - 1941.0).abs() / 1941.0 < 1e-10);
        assert!((fit.b - 1.230).abs() < 1e-12);
    }

    #[test]
    fn growth_model() {
        let xs = [10.0, 15.0, 20.0, 25.0, 30.0];
        let ys: Vec<f64> = xs.iter().map(|n| 1.189 * 1.0024f64.powf(*n)).collect();
        let fit = least_squares_fit(FitModel::ExponentialGrowth, &xs, &ys).unwrap();
        assert!((fit.a - 1.189).abs() < 1e-9);
        assert!((fit.b - 1.0024).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(least_squares_fit(FitModel::Power, &[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(least_squares_fit(FitModel::Power, &[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }
}
