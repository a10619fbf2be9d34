//! pep-lab: scenario runner for the parametrically driven, dissipative
//! oscillator.  Subcommands emit one CSV per figure panel plus a JSON
//! summary; `verify` runs the full analytic-vs-numeric acceptance suite.
//!
//! All inputs and outputs are in units of the loss rate (`gamma = 1`);
//! `--gamma` rescales the emitted columns for presentation only.
//!
//! Exit codes: 0 success, 1 usage error, 2 physics-regime error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{FileConfig, GridCfg};

#[derive(Parser)]
#[command(name = "pep-lab", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Detuning (units gamma)
    #[arg(long)]
    delta: Option<f64>,
    /// Drive amplitude(s) (units gamma); repeat for several curves
    #[arg(long)]
    omega: Vec<f64>,
    /// Drive phase (radians)
    #[arg(long)]
    theta: Option<f64>,
    /// Kerr strength (units gamma)
    #[arg(long)]
    u: Option<f64>,
    /// Presentation loss rate: rescales output columns only
    #[arg(long)]
    gamma: Option<f64>,
    /// Fock truncation
    #[arg(long)]
    n_levels: Option<usize>,
    /// JSON config file; command-line flags win
    #[arg(long)]
    config: Option<String>,
    /// Output base path (files get .csv/.json suffixes)
    #[arg(long)]
    out: Option<String>,
    /// Output format for data files
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Suppress version/timestamp headers for byte-identical reruns
    #[arg(long)]
    reproducible: bool,
    /// Worker thread count (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    /// Sweep/sample grid start
    #[arg(long)]
    grid_start: Option<f64>,
    /// Sweep/sample grid stop
    #[arg(long)]
    grid_stop: Option<f64>,
    /// Sweep/sample grid point count
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue branches of both moment systems across a drive sweep
    Eigen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Transient populations n(t), closed form next to the Lindblad engine
    Population {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Initial Fock level
        #[arg(long)]
        n0: Option<f64>,
    },
    /// Coherence functions g1/g2 against delay
    Coherence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Optical spectrum with its two-branch decomposition
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Delay window for the half-Fourier transform (units 1/gamma)
        #[arg(long)]
        tau_max: Option<f64>,
    },
    /// Husimi Q function of the steady state
    Husimi {
        #[command(flatten)]
        common: Common,
        /// Half-width of the phase-space window
        #[arg(long)]
        alpha_extent: Option<f64>,
        /// Points per phase-space axis
        #[arg(long)]
        alpha_points: Option<usize>,
    },
    /// Steady quadrature variances across the drive axis
    Variances {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Engine cross-check stride
        #[arg(long)]
        numeric_every: Option<usize>,
    },
    /// Liouvillian gap sweep and truncation-scaling fits
    Gapscan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Truncations to sweep (repeat the flag)
        #[arg(long)]
        n_value: Vec<usize>,
    },
    /// Run the acceptance suite and emit a pass/fail report
    Verify {
        #[command(flatten)]
        common: Common,
        /// Restrict to specific criteria (1-10); repeat the flag
        #[arg(long)]
        only: Vec<u8>,
    },
}

fn merge(common: &Common) -> Result<FileConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cli = FileConfig {
        delta: common.delta,
        omega: if common.omega.is_empty() { None } else { Some(common.omega.clone()) },
        theta: common.theta,
        u: common.u,
        gamma: common.gamma,
        n_levels: common.n_levels,
        out: common.out.clone(),
        format: common.format.clone(),
        reproducible: if common.reproducible { Some(true) } else { None },
        jobs: common.jobs,
        ..Default::default()
    };
    cfg = cfg.overlaid(cli);
    Ok(cfg)
}

fn apply_grid(cfg: &mut FileConfig, grid: &GridArgs, pick: fn(&mut FileConfig) -> &mut Option<GridCfg>) {
    if let (Some(start), Some(stop), Some(points)) =
        (grid.grid_start, grid.grid_stop, grid.grid_points)
    {
        *pick(cfg) = Some(GridCfg { start, stop, points });
    }
}

fn init_threads(cfg: &FileConfig) {
    if let Some(jobs) = cfg.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap would exit(2); the contract reserves 2 for physics errors
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let code = match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("pep-lab: {msg}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Eigen { common, grid } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.drive_grid);
            init_threads(&cfg);
            Ok(finish(commands::execute("eigen", &cfg, commands::cmd_eigen)))
        }
        Command::Population { common, grid, n0 } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.t_grid);
            if n0.is_some() {
                cfg.n0 = n0;
            }
            init_threads(&cfg);
            Ok(finish(commands::execute("population", &cfg, commands::cmd_population)))
        }
        Command::Coherence { common, grid } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.tau_grid);
            init_threads(&cfg);
            Ok(finish(commands::execute("coherence", &cfg, commands::cmd_coherence)))
        }
        Command::Spectrum { common, grid, tau_max } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.omega_grid);
            if tau_max.is_some() {
                cfg.tau_max = tau_max;
            }
            init_threads(&cfg);
            Ok(finish(commands::execute("spectrum", &cfg, commands::cmd_spectrum)))
        }
        Command::Husimi { common, alpha_extent, alpha_points } => {
            let mut cfg = merge(&common)?;
            if alpha_extent.is_some() {
                cfg.alpha_extent = alpha_extent;
            }
            if alpha_points.is_some() {
                cfg.alpha_points = alpha_points;
            }
            init_threads(&cfg);
            Ok(finish(commands::execute("husimi", &cfg, commands::cmd_husimi)))
        }
        Command::Variances { common, grid, numeric_every } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.drive_grid);
            if numeric_every.is_some() {
                cfg.numeric_every = numeric_every;
            }
            init_threads(&cfg);
            Ok(finish(commands::execute("variances", &cfg, commands::cmd_variances)))
        }
        Command::Gapscan { common, grid, n_value } => {
            let mut cfg = merge(&common)?;
            apply_grid(&mut cfg, &grid, |c| &mut c.drive_grid);
            if !n_value.is_empty() {
                cfg.n_values = Some(n_value);
            }
            init_threads(&cfg);
            Ok(finish(commands::execute("gapscan", &cfg, commands::cmd_gapscan)))
        }
        Command::Verify { common, only } => {
            let cfg = merge(&common)?;
            init_threads(&cfg);
            let (code, _) = commands::cmd_verify(&cfg, &only);
            Ok(code)
        }
    }
}

fn finish(outcome: commands::CommandOutcome) -> i32 {
    if let Some(err) = &outcome.summary.error {
        eprintln!("pep-lab: {err}");
    }
    for path in &outcome.summary.outputs {
        println!("wrote {path}");
    }
    outcome.exit_code
}
