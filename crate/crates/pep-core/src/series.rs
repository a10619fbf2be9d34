//! Sampled time- and frequency-domain series with light metadata.

use serde::Serialize;

/// A real-valued series sampled on a strictly increasing time grid
/// (units 1/gamma).
#[derive(Clone, Debug, Serialize)]
pub struct TimeTrace {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeTrace {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len());
        TimeTrace { label: label.into(), times, values }
    }
}

/// A spectral density sampled on a frequency grid (units gamma), together
/// with its trapezoid integral over that grid.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyTrace {
    pub label: String,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub integral: f64,
}

impl FrequencyTrace {
    pub fn new(label: impl Into<String>, omegas: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(omegas.len(), values.len());
        let integral = trapezoid(&omegas, &values);
        FrequencyTrace { label: label.into(), omegas, values, integral }
    }
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `n` evenly spaced points over `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect()
}
