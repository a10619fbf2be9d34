//! Run configuration: JSON document mirroring the command-line flags; any
//! flag given on the command line wins over the file.

use pep_core::fock::{FockSpace, ModelParams};
use pep_core::series::linspace;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridCfg {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridCfg {
    pub fn to_vec(self) -> Result<Vec<f64>, String> {
        if self.points < 2 || !(self.stop > self.start) {
            return Err(format!(
                "grid must have stop > start and >= 2 points, got {self:?}"
            ));
        }
        Ok(linspace(self.start, self.stop, self.points))
    }
}

/// Everything a run can configure.  All fields optional; defaults are
/// filled per command.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub delta: Option<f64>,
    /// Drive amplitudes; multi-valued commands draw one curve per entry.
    pub omega: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub u: Option<f64>,
    /// Presentation scale only: outputs are rescaled as if the loss rate
    /// were this value; all computation is done in units gamma = 1.
    pub gamma: Option<f64>,
    pub n_levels: Option<usize>,
    pub n0: Option<f64>,
    pub t_grid: Option<GridCfg>,
    pub tau_grid: Option<GridCfg>,
    /// Spectral frequency grid (units gamma).
    pub omega_grid: Option<GridCfg>,
    /// Drive-amplitude sweep grid.
    pub drive_grid: Option<GridCfg>,
    pub alpha_extent: Option<f64>,
    pub alpha_points: Option<usize>,
    pub n_values: Option<Vec<usize>>,
    pub tau_max: Option<f64>,
    /// Engine cross-check stride for sweep commands (every k-th point).
    pub numeric_every: Option<usize>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub reproducible: Option<bool>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))
    }

    /// Overlay `other` (command-line values) on top of `self`.
    pub fn overlaid(mut self, other: FileConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            delta, omega, theta, u, gamma, n_levels, n0, t_grid, tau_grid, omega_grid,
            drive_grid, alpha_extent, alpha_points, n_values, tau_max, numeric_every, out,
            format, reproducible, jobs
        );
        self
    }

    pub fn model_params(&self, default_delta: f64, omega: f64) -> Result<ModelParams, String> {
        ModelParams::new(
            self.delta.unwrap_or(default_delta),
            omega,
            self.theta.unwrap_or(0.0),
            1.0,
            self.u.unwrap_or(0.0),
        )
        .map_err(|e| e.to_string())
    }

    pub fn space(&self) -> Result<FockSpace, String> {
        FockSpace::new(self.n_levels.unwrap_or(pep_core::fock::DEFAULT_N_LEVELS))
            .map_err(|e| e.to_string())
    }

    pub fn omegas_or(&self, default: &[f64]) -> Vec<f64> {
        self.omega.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn reproducible(&self) -> bool {
        self.reproducible.unwrap_or(false)
    }

    /// Presentation loss rate; 1.0 leaves everything in internal units.
    pub fn gamma_scale(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_cli_values() {
        let file: FileConfig =
            serde_json::from_str(r#"{"delta": 1.0, "n_levels": 20, "n0": 2.0}"#).unwrap();
        let cli = FileConfig { delta: Some(1.5), ..Default::default() };
        let merged = file.overlaid(cli);
        assert_eq!(merged.delta, Some(1.5));
        assert_eq!(merged.n_levels, Some(20));
        assert_eq!(merged.n0, Some(2.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: Result<FileConfig, _> = serde_json::from_str(r#"{"detla": 1.0}"#);
        assert!(r.is_err());
    }

    #[test]
    fn grid_materializes() {
        let g = GridCfg { start: 0.0, stop: 1.0, points: 5 };
        assert_eq!(g.to_vec().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(GridCfg { start: 1.0, stop: 0.0, points: 5 }.to_vec().is_err());
    }
}
