//! Implementations of the pep-lab subcommands.  Each produces one or more
//! CSV files (one per figure panel) plus a JSON summary carrying the
//! agreement metrics; everything routes through [`crate::output`].

use crate::config::FileConfig;
use crate::output::{check_csv_schema, col, write_json, write_text, ColumnKind, Table};
use pep_core::error::Error as CoreError;
use pep_core::fock::{state_fock, ModelParams};
use pep_core::lindblad::{
    build_liouvillian, default_tau_max, population_time_trace, regression_correlator_from,
    spectrum_from_correlator, steady_state, CorrelatorKind, SPECTRUM_DTAU,
};
use pep_core::moments::{
    self, classify_regime, derived_scales, first_moment_system, population_transient,
    quadrature_variances_steady, second_moment_system,
};
use pep_core::phase_space::{husimi, quadrature_stats, GridSpec};
use pep_core::spectral::sweep_gap;
use pep_core::verify;
use serde::Serialize;
use std::path::PathBuf;

/// What a finished command reports back for the summary document.
#[derive(Serialize)]
pub struct RunSummary {
    pub command: String,
    pub params: serde_json::Value,
    /// Worst |analytic - numeric| per comparison the command performed.
    pub deviations: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct CommandOutcome {
    pub summary: RunSummary,
    pub exit_code: i32,
}

fn classify_error(e: &CoreError) -> i32 {
    if e.is_regime_error() {
        2
    } else {
        3
    }
}

/// Run a closure that builds tables; on a core error, still emit the JSON
/// summary (with the structured error) and the matching exit code.
pub fn execute(
    name: &str,
    cfg: &FileConfig,
    body: impl FnOnce(&FileConfig, &mut Emitter) -> Result<(), CoreError>,
) -> CommandOutcome {
    let base = PathBuf::from(cfg.out.clone().unwrap_or_else(|| name.to_string()));
    let mut emitter = Emitter {
        command: name.to_string(),
        base,
        gamma: cfg.gamma_scale(),
        reproducible: cfg.reproducible(),
        json_mode: matches!(cfg.format.as_deref(), Some("json")),
        tables: Vec::new(),
        deviations: serde_json::Map::new(),
        outputs: Vec::new(),
    };
    let result = body(cfg, &mut emitter);
    let error = result.as_ref().err().map(|e| e.to_string());
    let exit_code = match &result {
        Ok(()) => 0,
        Err(e) => classify_error(e),
    };
    if result.is_ok() {
        if let Err(io) = emitter.flush() {
            return CommandOutcome {
                summary: RunSummary {
                    command: name.into(),
                    params: params_echo(cfg),
                    deviations: emitter.deviations,
                    outputs: emitter.outputs.clone(),
                    error: Some(format!("i/o failure: {io}")),
                },
                exit_code: 3,
            };
        }
    }
    let mut summary = RunSummary {
        command: name.into(),
        params: params_echo(cfg),
        deviations: emitter.deviations.clone(),
        outputs: emitter.outputs.clone(),
        error,
    };
    match write_json(&emitter.base, ".json", &summary) {
        Ok(p) => summary.outputs.push(p.display().to_string()),
        Err(io) => {
            eprintln!("pep-lab: cannot write summary: {io}");
            return CommandOutcome { summary, exit_code: 3 };
        }
    }
    CommandOutcome { summary, exit_code }
}

fn params_echo(cfg: &FileConfig) -> serde_json::Value {
    serde_json::json!({
        "delta": cfg.delta,
        "omega": cfg.omega,
        "theta": cfg.theta.unwrap_or(0.0),
        "u": cfg.u.unwrap_or(0.0),
        "gamma_presentation": cfg.gamma_scale(),
        "n_levels": cfg.n_levels,
    })
}

/// Collects the tables a command produces and writes them at the end.
pub struct Emitter {
    command: String,
    pub base: PathBuf,
    gamma: f64,
    reproducible: bool,
    json_mode: bool,
    tables: Vec<(String, Table)>,
    pub deviations: serde_json::Map<String, serde_json::Value>,
    outputs: Vec<String>,
}

impl Emitter {
    pub fn add_table(&mut self, suffix: &str, table: Table) {
        self.tables.push((suffix.to_string(), table));
    }

    pub fn record_deviation(&mut self, key: &str, value: f64) {
        self.deviations.insert(key.to_string(), serde_json::json!(value));
    }

    pub fn record_info(&mut self, key: &str, value: serde_json::Value) {
        self.deviations.insert(key.to_string(), value);
    }

    fn flush(&mut self) -> std::io::Result<()> {
        for (suffix, table) in &self.tables {
            if self.json_mode {
                let doc = serde_json::json!({
                    "command": self.command,
                    "meta": table.meta.iter().cloned().collect::<std::collections::BTreeMap<String, String>>(),
                    "columns": table.columns.iter().map(|c| c.name).collect::<Vec<_>>(),
                    "rows": table.rows,
                });
                let p = write_json(&self.base, &format!("{suffix}.data.json"), &doc)?;
                self.outputs.push(p.display().to_string());
            } else {
                let text = table.to_csv(&self.command, self.gamma, self.reproducible);
                check_csv_schema(&text)
                    .unwrap_or_else(|e| panic!("internal: emitted CSV fails schema: {e}"));
                let p = write_text(&self.base, &format!("{suffix}.csv"), &text)?;
                self.outputs.push(p.display().to_string());
            }
        }
        Ok(())
    }
}

fn meta_params(table: &mut Table, p: &ModelParams, n_levels: Option<usize>) {
    table.add_meta("delta", p.delta);
    table.add_meta("omega", p.omega);
    table.add_meta("theta", p.theta);
    table.add_meta("gamma_internal", p.gamma);
    table.add_meta("u", p.u);
    if let Some(n) = n_levels {
        table.add_meta("n_levels", n);
    }
}

/// `eigen`: both moment systems' eigenvalue branches across a drive sweep.
pub fn cmd_eigen(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let grid = cfg
        .drive_grid
        .unwrap_or(crate::config::GridCfg { start: 0.0, stop: 3.0, points: 301 })
        .to_vec()
        .map_err(CoreError::InvalidArgument)?;
    let mut table = Table::new(vec![
        col("omega_drive", ColumnKind::Frequency),
        col("re_w_plus", ColumnKind::Frequency),
        col("im_w_plus", ColumnKind::Frequency),
        col("re_w_minus", ColumnKind::Frequency),
        col("im_w_minus", ColumnKind::Frequency),
        col("re_l3", ColumnKind::Frequency),
        col("im_l3", ColumnKind::Frequency),
        col("re_l_plus", ColumnKind::Frequency),
        col("im_l_plus", ColumnKind::Frequency),
        col("re_l_minus", ColumnKind::Frequency),
        col("im_l_minus", ColumnKind::Frequency),
    ]);
    let p0 = cfg.model_params(1.5, 0.0).map_err(CoreError::InvalidArgument)?;
    meta_params(&mut table, &p0, None);

    let mut worst = 0.0f64;
    for &om in &grid {
        let p = p0.with_omega(om)?;
        let f = first_moment_system(&p)?;
        let s = second_moment_system(&p)?;
        // cross-check: closed-form branches against the numeric multiset
        for v in f.values.iter() {
            let best =
                f.numeric.values.iter().map(|n| (n - v).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        for v in s.values.iter() {
            let best =
                s.numeric.values.iter().map(|n| (n - v).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        table.push_row(vec![
            om,
            f.values[0].re,
            f.values[0].im,
            f.values[1].re,
            f.values[1].im,
            s.values[2].re,
            s.values[2].im,
            s.values[0].re,
            s.values[0].im,
            s.values[1].re,
            s.values[1].im,
        ]);
    }
    table.add_meta("max_abs_deviation_closed_form_vs_numeric", worst);
    em.record_deviation("eigenvalues_closed_form_vs_numeric", worst);
    em.add_table("", table);
    Ok(())
}

/// `population`: transient n(t) curves, closed form next to the N-level
/// engine, one pair of columns per drive in long format.
pub fn cmd_population(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let omegas = cfg.omegas_or(&verify::DRIVES);
    let t_grid = cfg
        .t_grid
        .unwrap_or(crate::config::GridCfg { start: 0.0, stop: 6.0, points: 121 })
        .to_vec()
        .map_err(CoreError::InvalidArgument)?;
    let n0 = cfg.n0.unwrap_or(1.0);
    let space = cfg.space().map_err(CoreError::InvalidArgument)?;

    let mut table = Table::new(vec![
        col("omega_drive", ColumnKind::Frequency),
        col("t", ColumnKind::Time),
        col("n_analytic", ColumnKind::Dimensionless),
        col("n_numeric", ColumnKind::Dimensionless),
    ]);
    let p0 = cfg.model_params(1.5, 0.0).map_err(CoreError::InvalidArgument)?;
    meta_params(&mut table, &p0, Some(space.n_levels()));
    table.add_meta("n0", n0);

    let mut worst_all = 0.0f64;
    for &om in &omegas {
        let p = p0.with_omega(om)?;
        let liouv = build_liouvillian(&p, space)?;
        let rho0 = if (n0 - n0.round()).abs() < 1e-12 {
            state_fock(space, n0.round() as usize)?
        } else {
            return Err(CoreError::InvalidArgument(
                "initial population must be a Fock level for the engine run".into(),
            ));
        };
        let trace = population_time_trace(&rho0, &liouv, &t_grid)?;
        let mut worst = 0.0f64;
        for (t, numeric) in trace.times.iter().zip(&trace.values) {
            let analytic = population_transient(&p, n0, *t)?;
            worst = worst.max((analytic - numeric).abs());
            table.push_row(vec![om, *t, analytic, *numeric]);
        }
        em.record_deviation(&format!("population_omega_{om}"), worst);
        worst_all = worst_all.max(worst);
    }
    table.add_meta("max_abs_deviation_analytic_vs_numeric", worst_all);
    em.add_table("", table);
    Ok(())
}

/// `coherence`: g1 and g2 against delay, closed form next to the
/// quantum-regression engine.
pub fn cmd_coherence(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let omegas = cfg.omegas_or(&verify::DRIVES);
    let taus = cfg
        .tau_grid
        .unwrap_or(crate::config::GridCfg { start: 0.0, stop: 6.0, points: 61 })
        .to_vec()
        .map_err(CoreError::InvalidArgument)?;
    let space = cfg.space().map_err(CoreError::InvalidArgument)?;

    let mut table = Table::new(vec![
        col("omega_drive", ColumnKind::Frequency),
        col("tau", ColumnKind::Time),
        col("g1_analytic", ColumnKind::Dimensionless),
        col("g1_numeric", ColumnKind::Dimensionless),
        col("g2_analytic", ColumnKind::Dimensionless),
        col("g2_numeric", ColumnKind::Dimensionless),
    ]);
    let p0 = cfg.model_params(1.5, 0.0).map_err(CoreError::InvalidArgument)?;
    meta_params(&mut table, &p0, Some(space.n_levels()));

    let mut worst_all = 0.0f64;
    for &om in &omegas {
        let p = p0.with_omega(om)?;
        let scales = derived_scales(&p);
        let at_critical =
            matches!(classify_regime(&p).tag, moments::RegimeTag::AtCritical);
        // the engine needs a steady state; exactly at the critical drive the
        // truncated system still has one, so the comparison stays defined
        let _ = scales;
        let liouv = build_liouvillian(&p, space)?;
        let ss = steady_state(&liouv)?;
        let g1t = regression_correlator_from(&liouv, &ss, CorrelatorKind::G1Unnormalized, &taus)?;
        let g2t = regression_correlator_from(&liouv, &ss, CorrelatorKind::G2Unnormalized, &taus)?;
        let g1n = g1t.normalized();
        let g2n = g2t.normalized();
        let mut worst = 0.0f64;
        for (k, &tau) in taus.iter().enumerate() {
            let g1a = moments::g1(&p, tau)?;
            let g2a = moments::g2(&p, tau)?;
            worst = worst.max((g1a - g1n[k].re).abs()).max((g2a - g2n[k].re).abs());
            table.push_row(vec![om, tau, g1a, g1n[k].re, g2a, g2n[k].re]);
        }
        em.record_deviation(&format!("coherence_omega_{om}"), worst);
        if at_critical {
            em.record_info(
                "critical_drive_constants",
                serde_json::json!({"g1": 1.0, "g2": 3.0}),
            );
        }
        worst_all = worst_all.max(worst);
    }
    table.add_meta("max_abs_deviation_analytic_vs_numeric", worst_all);
    em.add_table("", table);
    Ok(())
}

/// `spectrum`: S(omega) with its two-branch decomposition and the numeric
/// half-Fourier spectrum.
pub fn cmd_spectrum(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let omegas = cfg.omegas_or(&verify::DRIVES);
    let w_grid = cfg
        .omega_grid
        .unwrap_or(crate::config::GridCfg { start: -6.0, stop: 6.0, points: 1201 })
        .to_vec()
        .map_err(CoreError::InvalidArgument)?;
    let space = cfg.space().map_err(CoreError::InvalidArgument)?;

    let mut table = Table::new(vec![
        col("omega_drive", ColumnKind::Frequency),
        col("omega", ColumnKind::Frequency),
        col("s_analytic", ColumnKind::SpectralDensity),
        col("s_plus", ColumnKind::SpectralDensity),
        col("s_minus", ColumnKind::SpectralDensity),
        col("s_numeric", ColumnKind::SpectralDensity),
    ]);
    let p0 = cfg.model_params(1.5, 0.0).map_err(CoreError::InvalidArgument)?;
    meta_params(&mut table, &p0, Some(space.n_levels()));

    let mut worst_all = 0.0f64;
    for &om in &omegas {
        let p = p0.with_omega(om)?;
        let scales = derived_scales(&p);
        if om >= scales.omega_c {
            return Err(CoreError::NoSteadyState { omega: om, omega_c: scales.omega_c });
        }
        let liouv = build_liouvillian(&p, space)?;
        let ss = steady_state(&liouv)?;
        let tau_max = cfg.tau_max.unwrap_or_else(|| default_tau_max(&p));
        let dt = SPECTRUM_DTAU / p.gamma;
        let mut steps = (tau_max / dt).ceil() as usize;
        if steps % 2 == 1 {
            steps += 1;
        }
        let taus: Vec<f64> = (0..=steps).map(|k| k as f64 * tau_max / steps as f64).collect();
        let trace = regression_correlator_from(&liouv, &ss, CorrelatorKind::G1Unnormalized, &taus)?;
        let numeric = spectrum_from_correlator(&trace, &w_grid)?;

        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for (k, &w) in w_grid.iter().enumerate() {
            let a = moments::spectrum(&p, w)?;
            peak = peak.max(a.total);
            worst = worst.max((a.total - numeric.values[k]).abs());
            table.push_row(vec![om, w, a.total, a.plus, a.minus, numeric.values[k]]);
        }
        em.record_deviation(&format!("spectrum_omega_{om}"), worst);
        em.record_info(
            &format!("spectrum_omega_{om}_relative_to_peak"),
            serde_json::json!(worst / peak),
        );
        em.record_info(
            &format!("spectrum_omega_{om}_grid_integral"),
            serde_json::json!(numeric.integral),
        );
        worst_all = worst_all.max(worst);
    }
    table.add_meta("max_abs_deviation_analytic_vs_numeric", worst_all);
    em.add_table("", table);
    Ok(())
}

/// `husimi`: the Q function of the steady state at one drive.
pub fn cmd_husimi(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let om = *cfg.omegas_or(&[0.5]).first().unwrap();
    let space = cfg.space().map_err(CoreError::InvalidArgument)?;
    let p = cfg.model_params(1.5, om).map_err(CoreError::InvalidArgument)?;
    let liouv = build_liouvillian(&p, space)?;
    let ss = steady_state(&liouv)?;

    let spec = match (cfg.alpha_extent, cfg.alpha_points) {
        (Some(e), pts) => GridSpec::symmetric(e, pts.unwrap_or(201))?,
        (None, Some(pts)) => GridSpec::symmetric(4.0, pts)?,
        (None, None) => GridSpec::auto_from_state(&ss, p.theta)?,
    };
    let grid = husimi(&ss, &spec)?;

    let mut table = Table::new(vec![
        col("re_alpha", ColumnKind::Dimensionless),
        col("im_alpha", ColumnKind::Dimensionless),
        col("q", ColumnKind::Dimensionless),
    ]);
    meta_params(&mut table, &p, Some(space.n_levels()));
    table.add_meta("normalization", grid.integral);
    for (iy, &y) in grid.im_alpha.iter().enumerate() {
        for (ix, &x) in grid.re_alpha.iter().enumerate() {
            table.push_row(vec![x, y, grid.value(iy, ix)]);
        }
    }
    em.record_deviation("husimi_normalization_minus_one", (grid.integral - 1.0).abs());
    let st = quadrature_stats(&ss, p.theta);
    em.record_info(
        "quadrature_stats",
        serde_json::json!({
            "var_x": st.var_x, "var_p": st.var_p, "uncertainty": st.uncertainty
        }),
    );
    em.add_table("", table);
    Ok(())
}

/// `variances`: steady quadrature variances across the drive axis, with
/// engine cross-checks on a stride.
pub fn cmd_variances(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let p0 = cfg.model_params(1.5, 0.0).map_err(CoreError::InvalidArgument)?;
    let oc = derived_scales(&p0).omega_c;
    let grid = cfg
        .drive_grid
        .unwrap_or(crate::config::GridCfg { start: 0.0, stop: 0.995 * oc, points: 100 })
        .to_vec()
        .map_err(CoreError::InvalidArgument)?;
    let every = cfg.numeric_every.unwrap_or(10).max(1);
    let space = cfg.space().map_err(CoreError::InvalidArgument)?;

    let mut table = Table::new(vec![
        col("omega_drive", ColumnKind::Frequency),
        col("var_x_analytic", ColumnKind::Dimensionless),
        col("var_p_analytic", ColumnKind::Dimensionless),
        col("uncertainty_analytic", ColumnKind::Dimensionless),
        col("var_x_numeric", ColumnKind::Dimensionless),
        col("var_p_numeric", ColumnKind::Dimensionless),
        col("numeric_computed", ColumnKind::Dimensionless),
    ]);
    meta_params(&mut table, &p0, Some(space.n_levels()));
    table.add_meta("numeric_every", every);

    let mut worst = 0.0f64;
    for (k, &om) in grid.iter().enumerate() {
        let p = p0.with_omega(om)?;
        let (sx, sp) = quadrature_variances_steady(&p)?;
        let (mut nx, mut np, mut computed) = (sx, sp, 0.0);
        if k % every == 0 {
            let liouv = build_liouvillian(&p, space)?;
            let ss = steady_state(&liouv)?;
            let st = quadrature_stats(&ss, p.theta);
            nx = st.var_x;
            np = st.var_p;
            computed = 1.0;
            worst = worst.max((nx - sx).abs()).max((np - sp).abs());
        }
        table.push_row(vec![om, sx, sp, (sx * sp).sqrt(), nx, np, computed]);
    }
    table.add_meta("max_abs_deviation_analytic_vs_numeric", worst);
    em.record_deviation("variances_analytic_vs_numeric", worst);
    em.add_table("", table);
    Ok(())
}

/// `gapscan`: Liouvillian gap curves per truncation, refined minima, and
/// the scaling fits.
pub fn cmd_gapscan(cfg: &FileConfig, em: &mut Emitter) -> Result<(), CoreError> {
    let p0 = cfg.model_params(1.0, 0.0).map_err(CoreError::InvalidArgument)?;
    let harmonic = p0.u == 0.0;
    let default_grid = if harmonic {
        crate::config::GridCfg { start: 1.0, stop: 1.6, points: 61 }
    } else {
        crate::config::GridCfg { start: 1.1, stop: 1.7, points: 61 }
    };
    let grid =
        cfg.drive_grid.unwrap_or(default_grid).to_vec().map_err(CoreError::InvalidArgument)?;
    let n_values = cfg.n_values.clone().unwrap_or_else(|| vec![10, 15, 20, 25, 30]);

    let study = sweep_gap(&p0, &grid, &n_values)?;

    let mut curves = Table::new(vec![
        col("n_levels", ColumnKind::Dimensionless),
        col("omega_drive", ColumnKind::Frequency),
        col("gap", ColumnKind::Frequency),
    ]);
    meta_params(&mut curves, &p0, None);
    for pt in &study.curves {
        curves.push_row(vec![pt.n_levels as f64, pt.omega, pt.gap]);
    }
    em.add_table("_curves", curves);

    let mut minima = Table::new(vec![
        col("n_levels", ColumnKind::Dimensionless),
        col("omega_at_min", ColumnKind::Frequency),
        col("gap_min", ColumnKind::Frequency),
    ]);
    meta_params(&mut minima, &p0, None);
    for m in &study.minima {
        minima.push_row(vec![m.n_levels as f64, m.omega_at_min, m.gap_min]);
    }
    em.add_table("_minima", minima);

    em.record_info(
        "gap_fit",
        serde_json::json!({
            "model": format!("{:?}", study.gap_fit.model),
            "a": study.gap_fit.a, "b": study.gap_fit.b, "log_residual": study.gap_fit.residual
        }),
    );
    em.record_info(
        "omega_at_min_fit",
        serde_json::json!({
            "model": format!("{:?}", study.omega_fit.model),
            "a": study.omega_fit.a, "b": study.omega_fit.b, "log_residual": study.omega_fit.residual
        }),
    );
    Ok(())
}

/// `verify`: the acceptance suite; prints one line per criterion and emits
/// the structured report.
pub fn cmd_verify(cfg: &FileConfig, only: &[u8]) -> (i32, serde_json::Value) {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let mut reports = Vec::new();
    let mut all_pass = true;
    let mut had_error = false;
    for id in ids {
        match verify::run_criterion(id) {
            Ok(report) => {
                println!("{}", report.summary_line());
                for line in report.detail_lines() {
                    println!("{line}");
                }
                all_pass &= report.passed;
                reports.push(serde_json::to_value(&report).expect("serializable report"));
            }
            Err(e) => {
                println!("criterion {id:02} [ERROR] {e}");
                had_error = true;
                reports.push(serde_json::json!({"id": id, "error": e.to_string()}));
            }
        }
    }
    let doc = serde_json::json!({
        "suite": "acceptance",
        "all_passed": all_pass && !had_error,
        "criteria": reports,
    });
    let base = PathBuf::from(cfg.out.clone().unwrap_or_else(|| "verify".to_string()));
    match write_json(&base, ".json", &doc) {
        Ok(p) => println!("report written to {}", p.display()),
        Err(e) => {
            eprintln!("pep-lab: cannot write report: {e}");
            return (3, doc);
        }
    }
    (if had_error { 3 } else if all_pass { 0 } else { 3 }, doc)
}
