//! The `nehari` command-line tool.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 convergence
//! failure or rejected solution, 3 certified nonexistence.

pub mod config;
pub mod io;
pub mod plot;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nehari_core::curve::{
    certified_nonexistence, energy_grid, fit_asymptote, intersect_with_lambda, refine_intersection,
    trace_curve, AsymptoteFit, Curve, CurvePoint,
};
use nehari_core::optimizer::{minimize_psi, verify_solution, MinimizeReport, SolutionReport};
use nehari_core::{NehariError, ScaledProblem, SignCase};
use serde::Serialize;

use crate::config::{Model, ProblemKind, RunConfig, Spacing};
use crate::plot::CurvePlot;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn nonexistence(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn from_core(e: NehariError) -> Self {
        match e {
            NehariError::NoConvergence { .. } => Self::convergence(e.to_string()),
            other => Self::config(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nehari",
    version,
    about = "Prescribed-energy eigenvalue curves on a scaled Nehari manifold"
)]
pub struct Cli {
    /// TOML configuration file; built-in defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["sps", "dirichlet-1d"])]
    pub problem: Option<String>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Overrides the configured seed and NEHARI_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First eigenvalue λ₁ = min I/J on the sphere.
    Eig,
    /// Trace the energy curve c ↦ λ_{c,1} over the configured sweep.
    Trace {
        #[arg(long, allow_negative_numbers = true)]
        lambda_target: Option<f64>,
    },
    /// Solve for a state with prescribed λ.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        lambda_target: Option<f64>,
    },
    /// Check a state file against the equation with given λ and energy c.
    Verify {
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
    },
    /// Print the effective configuration as TOML.
    PrintConfig,
}

/// Result of a command: exit code plus text for standard output.
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout }
    }
}

pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply_env()?;
    if let Some(problem) = &cli.problem {
        cfg.problem = if problem == "sps" {
            ProblemKind::Sps
        } else {
            ProblemKind::Dirichlet1d
        };
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.solver.rng_seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    match &cli.command {
        Command::Trace { lambda_target } | Command::Solve { lambda_target } => {
            if lambda_target.is_some() {
                cfg.solve.lambda_target = *lambda_target;
            }
        }
        Command::Verify { state, lambda, c } => {
            if state.is_some() {
                cfg.verify.state = state.clone();
            }
            if lambda.is_some() {
                cfg.verify.lambda = *lambda;
            }
            if c.is_some() {
                cfg.verify.c = *c;
            }
        }
        Command::Eig | Command::PrintConfig => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = effective_config(cli)?;
    if let Command::PrintConfig = cli.command {
        return Ok(Outcome::ok(cfg.to_toml()));
    }
    let model = cfg.build_model()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Eig => cmd_eig(&cfg, &model),
        Command::Trace { .. } => cmd_trace(&cfg, &model),
        Command::Solve { .. } => cmd_solve(&cfg, &model),
        Command::Verify { .. } => cmd_verify(&cfg, &model),
        Command::PrintConfig => unreachable!(),
    })
}

fn output_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        CliError::config(format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    Ok(&cfg.output_dir)
}

/// Fixes the sign so that the largest-magnitude entry is positive.
fn canonical_sign(mut u: Vec<f64>) -> Vec<f64> {
    let peak = u
        .iter()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    if peak < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
    u
}

#[derive(Serialize)]
struct Lambda1Json<'a> {
    problem: &'a str,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    restarts: usize,
    converged: bool,
}

fn first_eigenvalue(cfg: &RunConfig, p: &dyn ScaledProblem) -> Result<MinimizeReport, CliError> {
    minimize_psi(p, &cfg.solver).map_err(CliError::from_core)
}

pub fn cmd_eig(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let p = model.problem();
    let report = first_eigenvalue(cfg, p)?;
    let dir = output_dir(cfg)?;
    let fingerprint = p.describe();
    let summary = Lambda1Json {
        problem: &fingerprint,
        value: report.value,
        grad_norm: report.grad_norm,
        iterations: report.iterations,
        restarts: report.restarts_used,
        converged: report.converged,
    };
    io::write_json(&dir.join("lambda1.json"), &summary)?;
    let (coord, nodes) = model.coordinates();
    io::write_state_csv(
        &dir.join("eigenfunction.csv"),
        coord,
        &nodes,
        &canonical_sign(report.minimizer),
    )?;
    Ok(Outcome::ok(io::to_json(&summary)))
}

fn require_case(p: &dyn ScaledProblem) -> Result<SignCase, CliError> {
    p.sign_case().ok_or_else(|| {
        CliError::config(
            "this command needs an active sign case (a nonzero sigma or tau term)".to_string(),
        )
    })
}

fn sweep_grid(cfg: &RunConfig, case: SignCase) -> Result<Vec<f64>, CliError> {
    let s = &cfg.sweep;
    let interval = case.interval();
    if !(interval.contains(s.c_min) && interval.contains(s.c_max)) {
        return Err(CliError::config(format!(
            "sweep [{}, {}] lies outside the admissible interval {} of case {case}",
            s.c_min,
            s.c_max,
            interval.label()
        )));
    }
    energy_grid(s.c_min, s.c_max, s.count, s.spacing == Spacing::Log).map_err(CliError::from_core)
}

#[derive(Serialize)]
struct CurveJson<'a> {
    problem: &'a str,
    case: SignCase,
    lambda1: Option<f64>,
    lambda_target: Option<f64>,
    failed_points: usize,
    monotonicity_violations: &'a [usize],
    points: &'a [CurvePoint],
    asymptote: Option<AsymptoteFit>,
    config: &'a RunConfig,
}

fn write_curve(cfg: &RunConfig, curve: &Curve, lambda1: Option<f64>) -> Result<String, CliError> {
    let dir = output_dir(cfg)?;
    io::write_curve_csv(&dir.join("curve.csv"), curve)?;
    let sidecar = CurveJson {
        problem: &curve.fingerprint,
        case: curve.case,
        lambda1,
        lambda_target: cfg.solve.lambda_target,
        failed_points: curve.failed_count(),
        monotonicity_violations: &curve.monotonicity_violations,
        points: &curve.points,
        asymptote: fit_asymptote(curve).ok(),
        config: cfg,
    };
    io::write_json(&dir.join("curve.json"), &sidecar)?;
    let pts: Vec<(f64, f64)> = curve.ok_points().map(|p| (p.lambda, p.c)).collect();
    let title = format!("Energy curve, case {}", curve.case);
    let svg = CurvePlot {
        title: &title,
        points: &pts,
        lambda1,
        lambda_target: cfg.solve.lambda_target,
        log_c: cfg.sweep.spacing == Spacing::Log,
    }
    .render();
    io::write_text(&dir.join("curve.svg"), &svg)?;
    Ok(format!(
        "traced {} points ({} failed, {} monotonicity violations) into {}\n",
        curve.points.len(),
        curve.failed_count(),
        curve.monotonicity_violations.len(),
        dir.display()
    ))
}

fn check_failures(curve: &Curve) -> Result<(), CliError> {
    if curve.failed_count() * 5 > curve.points.len() {
        return Err(CliError::convergence(format!(
            "{} of {} curve points failed",
            curve.failed_count(),
            curve.points.len()
        )));
    }
    Ok(())
}

pub fn cmd_trace(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let p = model.problem();
    let case = require_case(p)?;
    let grid = sweep_grid(cfg, case)?;
    let lambda1 = first_eigenvalue(cfg, p).ok().map(|r| r.value);
    let curve = trace_curve(p, &grid, &cfg.solver).map_err(CliError::from_core)?;
    let text = write_curve(cfg, &curve, lambda1)?;
    check_failures(&curve)?;
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct SolveJson<'a> {
    status: &'a str,
    problem: String,
    case: SignCase,
    lambda_target: f64,
    lambda1: f64,
    message: String,
    c: Option<f64>,
    /// Energy where the traced curve crosses the target, before polishing.
    c_intersection: Option<f64>,
    probes: Option<usize>,
    report: Option<&'a SolutionReport>,
}

pub fn cmd_solve(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let p = model.problem();
    let case = require_case(p)?;
    let target = cfg.solve.lambda_target.ok_or_else(|| {
        CliError::config("solve needs lambda_target (config [solve] or --lambda-target)")
    })?;
    let grid = sweep_grid(cfg, case)?;
    let lambda1 = first_eigenvalue(cfg, p)?.value;
    let dir = output_dir(cfg)?.to_path_buf();
    let mut summary = SolveJson {
        status: "nonexistence",
        problem: p.describe(),
        case,
        lambda_target: target,
        lambda1,
        message: String::new(),
        c: None,
        c_intersection: None,
        probes: None,
        report: None,
    };

    if certified_nonexistence(case, target, lambda1) {
        summary.message = format!(
            "no nontrivial solution exists for lambda <= lambda_1 in case {case} (lambda_target = {target}, lambda_1 = {lambda1})"
        );
        io::write_json(&dir.join("solution.json"), &summary)?;
        return Err(CliError::nonexistence(summary.message));
    }

    let curve = trace_curve(p, &grid, &cfg.solver).map_err(CliError::from_core)?;
    write_curve(cfg, &curve, Some(lambda1))?;
    check_failures(&curve)?;
    let hit = intersect_with_lambda(p, &curve, target, cfg.solve.tol_lambda, &cfg.solver)
        .map_err(CliError::from_core)?;
    let Some(hit) = hit else {
        summary.status = "not-crossed";
        summary.message =
            format!("lambda_target = {target} is not crossed by the traced curve; widen the sweep");
        io::write_json(&dir.join("solution.json"), &summary)?;
        return Err(CliError::convergence(summary.message));
    };
    let (state, c) = refine_intersection(p, &hit, target);
    let report = verify_solution(p, &state, target, c, &cfg.verify.tolerances);
    let (coord, nodes) = model.coordinates();
    io::write_state_csv(&dir.join("solution.csv"), coord, &nodes, &state)?;
    summary.status = if report.accepted {
        "accepted"
    } else {
        "rejected"
    };
    summary.message = format!("solution with energy c = {c}");
    summary.c = Some(c);
    summary.c_intersection = Some(hit.c);
    summary.probes = Some(hit.probes);
    summary.report = Some(&report);
    io::write_json(&dir.join("solution.json"), &summary)?;
    let text = io::to_json(&summary);
    if report.accepted {
        Ok(Outcome::ok(text))
    } else {
        Ok(Outcome {
            code: 2,
            stdout: text,
        })
    }
}

pub fn cmd_verify(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let v = &cfg.verify;
    let path = v
        .state
        .as_ref()
        .ok_or_else(|| CliError::config("verify needs a state file (--state)"))?;
    let lambda = v
        .lambda
        .ok_or_else(|| CliError::config("verify needs --lambda"))?;
    let c = v.c.ok_or_else(|| CliError::config("verify needs --c"))?;
    let file = io::read_state_csv(path)?;
    let (coord, nodes) = model.coordinates();
    if file.coord != coord || file.nodes.len() != nodes.len() {
        return Err(CliError::config(format!(
            "{} holds {} '{}' nodes; the configured problem has {} '{coord}' nodes",
            path.display(),
            file.nodes.len(),
            file.coord,
            nodes.len()
        )));
    }
    if let Some(k) =
        (0..nodes.len()).find(|&k| (file.nodes[k] - nodes[k]).abs() > 1e-12 * nodes[k].abs())
    {
        return Err(CliError::config(format!(
            "{}: node {k} is at {} but the configured grid has {}",
            path.display(),
            file.nodes[k],
            nodes[k]
        )));
    }
    let report = verify_solution(model.problem(), &file.values, lambda, c, &v.tolerances);
    let code = if report.accepted { 0 } else { 2 };
    Ok(Outcome {
        code,
        stdout: io::to_json(&report),
    })
}
