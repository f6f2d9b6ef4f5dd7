//! Config-driven subcommands behind the single thin binary.
//!
//! Exit codes: 0 success, 2 config error, 3 simulation declared the domain
//! truncation inadequate, 4 an identity residual exceeded the configured
//! audit ceiling.

use crate::config::RunConfig;
use crate::diagnostics::{self, ResidualSeries, WeightKind};
use crate::error::{CglError, Result};
use crate::experiments::persist::{self, ParamsEcho, RunSummary, RUN_SCHEMA};
use crate::experiments::{self, necessity, svg};
use crate::functionals;
use crate::integrator::{BlowupStatus, Trajectory};
use crate::weights::make_weight;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "cgl-lab",
    about = "Radial blow-up laboratory for the rotated Ginzburg-Landau equation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep fan-out.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Weight-family epsilon (weights subcommand; overrides config).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Dimension N (weights subcommand; overrides config).
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One simulation with full identity audit.
    Simulate(CommonArgs),
    /// Independent simulations across theta with bounds and fits.
    Sweep(CommonArgs),
    /// Re-audit a stored trajectory against the evolution identities.
    VerifyIdentities(CommonArgs),
    /// Closed-form blow-up time bounds for the configured datum.
    Bounds(CommonArgs),
    /// Truncated-variance weight table with identity residual columns.
    Weights(CommonArgs),
    /// Scaling-family exponent scan.
    Necessity(CommonArgs),
    /// Weighted nonlinear inequality constant search.
    Lemma71(CommonArgs),
}

pub fn run(cli: Cli) -> i32 {
    let args = match &cli.command {
        Command::Simulate(a)
        | Command::Sweep(a)
        | Command::VerifyIdentities(a)
        | Command::Bounds(a)
        | Command::Weights(a)
        | Command::Necessity(a)
        | Command::Lemma71(a) => a.clone(),
    };
    let body = || match &cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::VerifyIdentities(a) => verify_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Weights(a) => weights_cmd(a),
        Command::Necessity(a) => necessity_cmd(a),
        Command::Lemma71(a) => lemma71_cmd(a),
    };
    let outcome = match args.threads {
        Some(n) => {
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(body),
                Err(e) => Err(CglError::Config(format!("thread pool: {e}"))),
            }
        }
        None => body(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CglError::Config(_) | CglError::Schema { .. } | CglError::Io { .. } => EXIT_CONFIG,
                _ => EXIT_ERROR,
            }
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CglError::Config("--config <path> is required".into()))?;
    RunConfig::load(path)
}

fn out_dir(args: &CommonArgs, cfg: Option<&RunConfig>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn params_echo(cfg: &RunConfig, theta: f64, weight_epsilon: Option<f64>) -> ParamsEcho {
    ParamsEcho {
        dim: cfg.dim,
        alpha: cfg.alpha,
        theta,
        r_max: cfg.grid.r_max,
        m: cfg.grid.m,
        dt0: cfg.integrator.dt0,
        dt_min: cfg.integrator.dt_min,
        u_max: cfg.integrator.u_max,
        tol: cfg.integrator.tol,
        t_end: cfg.integrator.t_end,
        record_every: cfg.integrator.record_every,
        linear_only: cfg.integrator.linear_only,
        weight_epsilon,
        gn_constant_c: cfg.gn_constant_c,
    }
}

/// The full identity audit on the smooth span of a trajectory.
fn audit_residuals(
    traj: &Trajectory,
    alpha: f64,
    theta: f64,
    span_end: f64,
) -> Result<Vec<ResidualSeries>> {
    let audited = diagnostics::truncate_to(traj, span_end);
    let mut out = Vec::new();
    if audited.samples.len() < 3 {
        return Ok(out);
    }
    out.push(diagnostics::check_mass_identity(&audited, alpha, theta)?);
    out.push(diagnostics::check_energy_identity(&audited)?);
    out.push(diagnostics::check_modulus_identity(&audited)?);
    out.extend(diagnostics::check_combined_identities(&audited, alpha, theta)?);
    if audited.record_every == 1 {
        let mut kinds = vec![WeightKind::Quadratic];
        if audited.has_weight_audit {
            kinds.push(WeightKind::Truncated);
        }
        for kind in kinds {
            match diagnostics::check_variance_identities(&audited, kind, theta, alpha) {
                Ok(series) => out.extend(series),
                // stored trajectories may lack the dense-audit companion
                Err(CglError::DenseRecordingRequired(what)) => {
                    eprintln!("skipping variance identities: {what} unavailable");
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn residual_map(series: &[ResidualSeries]) -> BTreeMap<String, f64> {
    series
        .iter()
        .map(|s| (s.report.name.clone(), s.report.max_rel_residual))
        .collect()
}

fn audit_exit(cfg: &RunConfig, residuals: &BTreeMap<String, f64>) -> i32 {
    if let Some(audit) = &cfg.audit {
        for (name, &r) in residuals {
            if r > audit.max_rel_residual {
                eprintln!(
                    "audit failure: {name} residual {r:.3e} exceeds ceiling {:.3e}",
                    audit.max_rel_residual
                );
                return EXIT_AUDIT;
            }
        }
    }
    EXIT_OK
}

fn span_end_of(status: BlowupStatus, t_lo: f64, t_last: f64) -> f64 {
    match status {
        BlowupStatus::Blowup => 0.9 * t_lo,
        _ => t_last,
    }
}

fn simulate_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let theta = cfg.single_theta()?;
    let grid = cfg.build_grid()?;
    let zeta = cfg.zeta();
    let p = cfg.sim_params(grid.clone(), theta)?;
    let u0 = cfg.initial_data.materialize(&grid, &zeta)?;

    let (traj, est) = crate::integrator::simulate(&u0, &p)?;
    let series = audit_residuals(&traj, cfg.alpha, theta, span_end_of(est.status, est.t_lo, est.t_last))?;
    let residuals = residual_map(&series);
    let tau_m = diagnostics::measure_tau(&traj, cfg.alpha)?;

    persist::write_trajectory_csv(&dir.join("trajectory.csv"), &traj)?;
    persist::write_variance_audit_csv(&dir.join("variance_audit.csv"), &traj)?;
    let summary = RunSummary {
        schema: RUN_SCHEMA.into(),
        params: params_echo(&cfg, theta, p.weight.as_ref().map(|w| w.epsilon)),
        status: est.status,
        t_last: est.t_last,
        t_lo: est.t_lo,
        t_hi: est.t_hi,
        t_fit: est.t_fit,
        fit_exponent: est.fit_exponent,
        tau: tau_m.tau,
        k_const: tau_m.k,
        identity_residual_max: residuals.clone(),
    };
    persist::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "simulate: status={:?} t_lo={} t_hi={} samples={} -> {}",
        est.status,
        est.t_lo,
        est.t_hi,
        traj.samples.len(),
        dir.display()
    );
    if est.status == BlowupStatus::TruncationViolated {
        eprintln!("truncation violated: |u(r_max)| exceeded the tail threshold");
        return Ok(EXIT_TRUNCATION);
    }
    Ok(audit_exit(&cfg, &residuals))
}

fn sweep_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let thetas = cfg.sweep_thetas()?;
    let grid = cfg.build_grid()?;
    let zeta = cfg.zeta();
    let base = cfg.sim_params(grid.clone(), 0.0)?;

    let results = experiments::theta_sweep(&cfg.initial_data, &base, &thetas, &zeta, cfg.gn_constant_c)?;
    let records: Vec<experiments::SweepRecord> = results.iter().map(|(_, r)| r.clone()).collect();

    for (i, (traj, rec)) in results.iter().enumerate() {
        let sub = dir.join(format!("theta_{i:03}"));
        persist::write_trajectory_csv(&sub.join("trajectory.csv"), traj)?;
        persist::write_variance_audit_csv(&sub.join("variance_audit.csv"), traj)?;
        let series = audit_residuals(
            traj,
            cfg.alpha,
            rec.theta,
            span_end_of(rec.status, rec.t_lo, rec.t_lo),
        )?;
        let reports: Vec<&diagnostics::IdentityReport> =
            series.iter().map(|s| &s.report).collect();
        persist::write_json(&sub.join("identities.json"), &reports)?;
        let tau_m = diagnostics::measure_tau(traj, cfg.alpha)?;
        let summary = RunSummary {
            schema: RUN_SCHEMA.into(),
            params: params_echo(&cfg, rec.theta, base.weight.as_ref().map(|w| w.epsilon)),
            status: rec.status,
            t_last: rec.t_lo,
            t_lo: rec.t_lo,
            t_hi: rec.t_hi,
            t_fit: rec.t_fit,
            fit_exponent: None,
            tau: tau_m.tau,
            k_const: tau_m.k,
            identity_residual_max: BTreeMap::from([
                ("mass_evolution".to_string(), rec.res_mass),
                ("energy_dissipation".to_string(), rec.res_energy),
                ("modulus_identity".to_string(), rec.res_modulus),
                ("mass_evolution_nonlinear_form".to_string(), rec.res_comb_nl),
                ("mass_evolution_gradient_form".to_string(), rec.res_comb_grad),
            ]),
        };
        persist::write_json(&sub.join("summary.json"), &summary)?;
    }
    persist::write_sweep_csv(&dir.join("sweep.csv"), &records)?;

    let fit = experiments::fit_cos_power(&records).ok();
    #[derive(serde::Serialize)]
    struct SweepSummary<'a> {
        schema: &'a str,
        thetas: &'a [f64],
        fit: Option<experiments::CosPowerFit>,
        n_blowup: usize,
        n_truncation_violated: usize,
    }
    let n_blowup = records
        .iter()
        .filter(|r| r.status == BlowupStatus::Blowup)
        .count();
    let n_trunc = records
        .iter()
        .filter(|r| r.status == BlowupStatus::TruncationViolated)
        .count();
    persist::write_json(
        &dir.join("sweep_summary.json"),
        &SweepSummary {
            schema: "cgl-lab/sweep/1",
            thetas: &thetas,
            fit,
            n_blowup,
            n_truncation_violated: n_trunc,
        },
    )?;

    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == BlowupStatus::Blowup)
        .map(|r| (r.cos_theta, r.t_lo))
        .collect();
    svg::write_plot(
        &dir.join("tlo_vs_costheta.svg"),
        &svg::PlotSpec {
            title: "blow-up time vs cos(theta)",
            x_label: "cos(theta)",
            y_label: "t_lo",
            log_x: true,
            log_y: true,
            series: vec![("t_lo".into(), pts)],
        },
    )?;

    println!(
        "sweep: {} angles, {} blow-ups -> {}",
        records.len(),
        n_blowup,
        dir.display()
    );
    if n_trunc > 0 {
        eprintln!("{n_trunc} run(s) violated the truncation audit");
        return Ok(EXIT_TRUNCATION);
    }
    for rec in &records {
        let map = BTreeMap::from([
            ("mass_evolution".to_string(), rec.res_mass),
            ("energy_dissipation".to_string(), rec.res_energy),
            ("modulus_identity".to_string(), rec.res_modulus),
            ("mass_evolution_nonlinear_form".to_string(), rec.res_comb_nl),
            ("mass_evolution_gradient_form".to_string(), rec.res_comb_grad),
        ]);
        let code = audit_exit(&cfg, &map);
        if code != EXIT_OK {
            return Ok(code);
        }
    }
    Ok(EXIT_OK)
}

fn verify_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let (traj, summary) = persist::read_trajectory(&dir)?;
    let alpha = summary.params.alpha;
    let theta = summary.params.theta;
    let span_end = span_end_of(summary.status, summary.t_lo, summary.t_last);
    let series = audit_residuals(&traj, alpha, theta, span_end)?;
    let residuals = residual_map(&series);

    let reports: Vec<&diagnostics::IdentityReport> = series.iter().map(|s| &s.report).collect();
    persist::write_json(&dir.join("identities.json"), &reports)?;
    let mut plot_series = Vec::new();
    for s in &series {
        persist::write_residual_csv(
            &dir.join(format!("residual_{}.csv", s.report.name)),
            s,
        )?;
        plot_series.push((
            s.report.name.clone(),
            s.times
                .iter()
                .zip(&s.residuals)
                .map(|(&t, &r)| (t, r.abs().max(1e-18)))
                .collect::<Vec<_>>(),
        ));
    }
    svg::write_plot(
        &dir.join("residuals.svg"),
        &svg::PlotSpec {
            title: "identity residuals vs time",
            x_label: "t",
            y_label: "|residual|",
            log_x: false,
            log_y: true,
            series: plot_series,
        },
    )?;
    for s in &series {
        println!(
            "{}: max_abs={:.3e} max_rel={:.3e} at t={}",
            s.report.name, s.report.max_abs_residual, s.report.max_rel_residual, s.report.worst_time
        );
    }
    Ok(audit_exit(&cfg, &residuals))
}

fn bounds_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let theta = cfg.single_theta()?;
    let grid = cfg.build_grid()?;
    let zeta = cfg.zeta();
    let u0 = cfg.initial_data.materialize(&grid, &zeta)?;
    let rep = functionals::report(&grid, &u0, cfg.alpha)?;
    persist::write_json(&dir.join("functionals.json"), &rep)?;
    let bounds = crate::bounds::bounds_report(
        cfg.dim,
        cfg.alpha,
        theta,
        rep.mass,
        rep.energy,
        cfg.gn_constant_c,
        0.0,
    )?;
    persist::write_json(&dir.join("bounds.json"), &bounds)?;
    println!(
        "bounds: thm1_upper={} thm2_lower={} eta={} K={} -> {}",
        bounds.thm1_upper,
        bounds.thm2_lower,
        bounds.eta,
        bounds.k_const,
        dir.display()
    );
    Ok(EXIT_OK)
}

fn weights_cmd(args: &CommonArgs) -> Result<i32> {
    // config optional here: --epsilon/--dim suffice
    let cfg = match &args.config {
        Some(_) => Some(load_config(args)?),
        None => None,
    };
    let epsilon = args
        .epsilon
        .or_else(|| cfg.as_ref().and_then(|c| c.weight.as_ref()?.epsilon))
        .unwrap_or(0.1);
    let dim = args.dim.or_else(|| cfg.as_ref().map(|c| c.dim)).unwrap_or(2);
    let dir = out_dir(args, cfg.as_ref());
    let zeta = crate::weights::make_zeta(crate::weights::HShape::StandardMollifier);
    let w = make_weight(zeta, epsilon, dim)?;
    // 1000 log-spaced radii spanning well past the active band
    let radii: Vec<f64> = (0..1000)
        .map(|i| {
            let x = i as f64 / 999.0;
            (0.01 / epsilon) * (1000.0f64).powf(x)
        })
        .collect();
    persist::write_weights_csv(&dir.join("weights.csv"), &w, &radii)?;
    println!(
        "weights: epsilon={epsilon} dim={dim} -> {}",
        dir.join("weights.csv").display()
    );
    Ok(EXIT_OK)
}

fn necessity_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let section = cfg.necessity.as_ref().ok_or_else(|| {
        CglError::Config("necessity subcommand needs a `necessity` config section".into())
    })?;
    let zeta = cfg.zeta();
    let report = necessity::necessity_scan(
        section.family,
        cfg.dim,
        cfg.alpha,
        &section.lambdas,
        section.radius,
        cfg.grid.r_max,
        &zeta,
    )?;
    persist::write_json(&dir.join("necessity.json"), &report)?;
    // tabular form: one row per lambda
    let mut csv = String::from("lambda,mass,grad_sq,lp_alpha2,r2_lp_alpha2,r2_grad_sq\n");
    for (i, l) in report.lambdas.iter().enumerate() {
        use std::fmt::Write as _;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            l,
            report.lines[0].values[i],
            report.lines[1].values[i],
            report.lines[2].values[i],
            report.lines[3].values[i],
            report.lines[4].values[i]
        );
    }
    persist::write_text(&dir.join("necessity.csv"), &csv)?;
    for line in &report.lines {
        println!(
            "{}: fitted exponent {:.4} (predicted {})",
            line.quantity, line.fitted_exponent, line.predicted_exponent
        );
    }
    Ok(EXIT_OK)
}

fn lemma71_cmd(args: &CommonArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    let dir = out_dir(args, Some(&cfg));
    let section = cfg.lemma71.as_ref().ok_or_else(|| {
        CglError::Config("lemma71 subcommand needs a `lemma71` config section".into())
    })?;
    let zeta = cfg.zeta();
    let grid = necessity::geometric_c_grid(
        section.c_grid_min,
        section.c_grid_max,
        section.c_grid_points,
    );
    let report = necessity::lemma71_check(
        &section.corpus,
        cfg.alpha,
        cfg.dim,
        section.m_bound,
        &grid,
        section.allow_alpha_outside,
        cfg.grid.r_max,
        &zeta,
    )?;
    persist::write_json(&dir.join("lemma71.json"), &report)?;
    println!(
        "lemma71: C_min_found={} (exact requirement {}) over {} fields",
        report.c_min_found,
        report.c_needed,
        report.fields.len()
    );
    Ok(EXIT_OK)
}
