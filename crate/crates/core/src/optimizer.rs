//! Projected Sobolev-gradient descent on the sphere `M_s = {I_s = 1}`,
//! solution verification and Newton refinement of prescribed-λ solutions.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};
use crate::scaled::{
    dot, h_pairing, lambda_tilde_dual, nehari_relative_from_values, phi_lambda_from_values,
    pohozaev_from_values, project_to_sphere, tangent_project, FunctionalValues, ScaledProblem,
    ScalingExponents, Tolerances,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Riesz norm of the tangent gradient accepted as stationary.
    pub grad_tol: f64,
    /// Initial step length (Sobolev metric).
    pub step: f64,
    pub backtracking: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Random restarts; a warm start, when given, runs in addition.
    pub restarts: usize,
    pub rng_seed: u64,
    /// Iterate norm above which the coercivity diagnostic is raised.
    pub norm_ceiling: f64,
    pub tolerances: Tolerances,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 3000,
            grad_tol: 1e-8,
            step: 1.0,
            backtracking: 0.5,
            armijo: 1e-4,
            restarts: 8,
            rng_seed: 20_240_521,
            norm_ceiling: 1e6,
            tolerances: Tolerances::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NehariError::InvalidConfig(msg));
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1".to_string());
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            return bad(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtracking
            ));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!(
                "armijo constant must lie in (0, 1), got {}",
                self.armijo
            ));
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub minimizer: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    /// Final value of every run, warm start first.
    pub restart_values: Vec<f64>,
    /// Objective after every accepted step of the reported run.
    pub history: Vec<f64>,
    /// `t_c(u*)` for reduced-functional runs.
    pub fiber_t: Option<f64>,
    pub coercivity_warning: Option<String>,
}

/// Relative size of objective changes treated as rounding noise.
pub const ROUNDING: f64 = 1e-13;

/// A single descent run.
struct Run {
    state: Vec<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    history: Vec<f64>,
    fiber_t: Option<f64>,
    warning: Option<String>,
}

/// Objective value, dual derivative and fiber time (if any) at a state.
type Evaluation = (f64, Vec<f64>, Option<f64>);

fn descend<P, E>(p: &P, start: &[f64], cfg: &SolverConfig, eval: &E) -> Result<Run>
where
    P: ScaledProblem + ?Sized,
    E: Fn(&[f64]) -> Result<Evaluation> + ?Sized,
{
    let tol = &cfg.tolerances;
    let (_, mut u) = project_to_sphere(p, start, tol)?;
    let tangent = |u: &[f64], dual: &[f64]| {
        let a_riesz = p.riesz(&p.derivatives(u).a);
        tangent_project(p, &p.riesz(dual), &a_riesz)
    };
    let (mut value, dual, mut fiber_t) = eval(&u)?;
    let mut grad = tangent(&u, &dual);
    let mut grad_norm = p.norm(&grad);
    let mut history = vec![value];
    let mut alpha = cfg.step;
    let mut warning = None;
    let mut iterations = 0;

    while iterations < cfg.max_iters && grad_norm > cfg.grad_tol {
        iterations += 1;
        let mut trial_alpha = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&grad)
                .map(|(a, g)| a - trial_alpha * g)
                .collect();
            if let Ok((_, projected)) = project_to_sphere(p, &trial, tol) {
                if let Ok(evaluation) = eval(&projected) {
                    let decrease = cfg.armijo * trial_alpha * grad_norm * grad_norm;
                    let sufficient = evaluation.0 <= value - decrease;
                    // Below the rounding level of the objective the Armijo test
                    // is meaningless; accept steps that shrink the gradient
                    // without raising the value beyond rounding.
                    let rounding = ROUNDING * value.abs().max(1.0);
                    let at_floor = decrease < rounding
                        && evaluation.0 <= value + rounding
                        && p.norm(&tangent(&projected, &evaluation.1)) < grad_norm;
                    if sufficient || at_floor {
                        accepted = Some((projected, evaluation));
                        break;
                    }
                }
            }
            trial_alpha *= cfg.backtracking;
        }
        let Some((next, (next_value, next_dual, next_t))) = accepted else {
            break;
        };
        let next_grad = tangent(&next, &next_dual);
        let du: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let curvature = p.inner(&du, &dg);
        alpha = if curvature > 0.0 {
            (p.inner(&du, &du) / curvature).clamp(1e-6, 1e6)
        } else {
            cfg.step
        };

        u = next;
        value = next_value;
        fiber_t = next_t;
        grad = next_grad;
        grad_norm = p.norm(&grad);
        history.push(value);
        if warning.is_none() {
            let norm = p.norm(&u);
            if norm > cfg.norm_ceiling {
                warning = Some(format!(
                    "iterate norm {norm:e} exceeds the ceiling {:e} while the objective stays at {value}",
                    cfg.norm_ceiling
                ));
            }
        }
    }
    Ok(Run {
        state: u,
        value,
        grad_norm,
        iterations,
        history,
        fiber_t,
        warning,
    })
}

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn multistart<P, E>(
    p: &P,
    cfg: &SolverConfig,
    warm_start: Option<&[f64]>,
    eval: &E,
) -> Result<MinimizeReport>
where
    P: ScaledProblem + ?Sized,
    E: Fn(&[f64]) -> Result<Evaluation> + Sync + ?Sized,
{
    cfg.validate()?;
    if let Some(w) = warm_start {
        if w.len() != p.dim() {
            return Err(NehariError::GridMismatch {
                left: p.dim(),
                right: w.len(),
            });
        }
    }
    let mut starts: Vec<Vec<f64>> = warm_start.map(|w| vec![w.to_vec()]).unwrap_or_default();
    starts.extend((0..cfg.restarts).map(|k| p.random_state(&mut restart_rng(cfg.rng_seed, k))));

    let runs: Vec<Result<Run>> = starts
        .par_iter()
        .map(|start| descend(p, start, cfg, eval))
        .collect();
    let mut best: Option<Run> = None;
    let mut restart_values = Vec::with_capacity(runs.len());
    let mut first_error = None;
    for run in runs {
        match run {
            Ok(run) => {
                restart_values.push(run.value);
                let better = best.as_ref().is_none_or(|b| run.value < b.value);
                if better {
                    best = Some(run);
                }
            }
            Err(e) => {
                restart_values.push(f64::NAN);
                first_error.get_or_insert(e);
            }
        }
    }
    let Some(best) = best else {
        return Err(first_error.expect("at least one start"));
    };
    let converged = best.grad_norm <= cfg.grad_tol;
    if !converged {
        return Err(NehariError::NoConvergence {
            what: "projected gradient descent",
            iterations: best.iterations,
            residual: best.grad_norm,
        });
    }
    Ok(MinimizeReport {
        minimizer: best.state,
        value: best.value,
        grad_norm: best.grad_norm,
        iterations: best.iterations,
        converged,
        restarts_used: starts.len(),
        restart_values,
        history: best.history,
        fiber_t: best.fiber_t,
        coercivity_warning: best.warning,
    })
}

/// `Ψ̃ = I_s/J_s` and its dual derivative `(A_s − Ψ̃ B_s)/J_s`.
fn psi_evaluation<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    tol: &Tolerances,
) -> Result<Evaluation> {
    let v = p.functionals(u);
    if !(v.i_s > tol.zero) || !(v.j_s > 0.0) {
        return Err(NehariError::ZeroState { value: v.i_s });
    }
    let psi = v.i_s / v.j_s;
    let d = p.derivatives(u);
    let dual =
        d.a.iter()
            .zip(&d.b)
            .map(|(a, b)| (a - psi * b) / v.j_s)
            .collect();
    Ok((psi, dual, None))
}

/// `λ₁ = min Ψ̃` over the sphere.
pub fn minimize_psi<P: ScaledProblem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
) -> Result<MinimizeReport> {
    let tol = cfg.tolerances;
    multistart(p, cfg, None, &|u: &[f64]| psi_evaluation(p, u, &tol))
}

/// `λ_{c,1} = min Λ̃_c` over the sphere.
pub fn minimize_lambda_tilde<P: ScaledProblem + ?Sized>(
    p: &P,
    c: f64,
    cfg: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<MinimizeReport> {
    let case = p.sign_case().ok_or_else(|| {
        NehariError::CaseMismatch("the reduced functional needs an active sign case".to_string())
    })?;
    let interval = case.interval();
    if !interval.contains(c) {
        return Err(NehariError::EnergyOutsideInterval {
            c,
            case,
            interval: interval.label(),
        });
    }
    let tol = cfg.tolerances;
    multistart(p, cfg, warm_start, &|u: &[f64]| {
        let (value, fiber, dual) = lambda_tilde_dual(p, u, c, &tol)?;
        Ok((value, dual, Some(fiber.t)))
    })
}

/// The state `v* = u*_{t_c(u*)}` on the Nehari set belonging to a reduced minimizer.
pub fn nehari_point<P: ScaledProblem + ?Sized>(p: &P, report: &MinimizeReport) -> Option<Vec<f64>> {
    report.fiber_t.map(|t| p.scale(&report.minimizer, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    /// Bound on each scale-relative residual.
    pub residual: f64,
    /// `|h(v)[v]| > h_pairing · ‖v‖` is required when a sign case is active.
    pub h_pairing: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            h_pairing: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    #[serde(skip)]
    pub state: Vec<f64>,
    pub lambda: f64,
    pub c: f64,
    pub weak_residual: f64,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    pub energy_residual: f64,
    pub h_pairing: f64,
    /// `None` when no sign case is active and the nondegeneracy pairing is void.
    pub h_pairing_ok: Option<bool>,
    pub zero_state: bool,
    pub dominant: String,
    pub accepted: bool,
}

/// Residuals of `A_s(v) = λ B_s(v) + f(v) + g(v)` with energy `c`, each divided
/// by the magnitude of its terms.
pub fn verify_solution<P: ScaledProblem + ?Sized>(
    p: &P,
    v: &[f64],
    lambda: f64,
    c: f64,
    tol: &VerifyTolerances,
) -> SolutionReport {
    let values = p.functionals(v);
    let exps = p.exponents();
    let zero_state = !(values.i_s > Tolerances::default().zero) || !(values.j_s > 0.0);
    if zero_state {
        return SolutionReport {
            state: v.to_vec(),
            lambda,
            c,
            weak_residual: f64::NAN,
            nehari_residual: f64::NAN,
            pohozaev_residual: f64::NAN,
            energy_residual: f64::NAN,
            h_pairing: 0.0,
            h_pairing_ok: p.sign_case().map(|_| false),
            zero_state,
            dominant: "zero_state".to_string(),
            accepted: false,
        };
    }
    let weak_residual = weak_residual(p, v, lambda);
    let nehari_residual = nehari_relative_from_values(exps, &values, c);
    let pohozaev_residual = pohozaev_relative(exps, &values, lambda);
    let energy_scale =
        values.i_s.abs() + lambda.abs() * values.j_s + values.f.abs() + values.g.abs() + c.abs();
    let energy_residual = (phi_lambda_from_values(&values, lambda) - c).abs() / energy_scale;
    let h = h_pairing(p, v);
    let h_pairing_ok = p.sign_case().map(|_| h.abs() > tol.h_pairing * p.norm(v));
    let named = [
        ("weak", weak_residual),
        ("nehari", nehari_residual),
        ("pohozaev", pohozaev_residual),
        ("energy", energy_residual),
    ];
    let dominant = named
        .iter()
        .fold(named[0], |acc, x| if x.1 > acc.1 { *x } else { acc })
        .0
        .to_string();
    let accepted = named.iter().all(|(_, r)| *r <= tol.residual) && h_pairing_ok != Some(false);
    SolutionReport {
        state: v.to_vec(),
        lambda,
        c,
        weak_residual,
        nehari_residual,
        pohozaev_residual,
        energy_residual,
        h_pairing: h,
        h_pairing_ok,
        zero_state,
        dominant,
        accepted,
    }
}

/// `|sI − sλJ − qF − rG|` over the sum of the magnitudes of its terms.
pub fn pohozaev_relative(exps: ScalingExponents, v: &FunctionalValues, lambda: f64) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    let res = pohozaev_from_values(exps, v, 1.0, lambda, 1.0, 1.0);
    let scale = s * v.i_s.abs() + s * lambda.abs() * v.j_s.abs() + q * v.f.abs() + r * v.g.abs();
    res.abs() / scale
}

/// Dual norm of `Φ_λ′(v)` over the hat-function basis and `v` itself, divided by
/// the same quantity for the absolute values of the four terms.
pub fn weak_residual<P: ScaledProblem + ?Sized>(p: &P, v: &[f64], lambda: f64) -> f64 {
    let d = p.derivatives(v);
    let norms = p.probe_norms();
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..v.len() {
        let r = d.a[k] - lambda * d.b[k] - d.f[k] - d.g[k];
        let m = d.a[k].abs() + (lambda * d.b[k]).abs() + d.f[k].abs() + d.g[k].abs();
        res = res.max(r.abs() / norms[k]);
        scale = scale.max(m / norms[k]);
    }
    let vn = p.norm(v);
    if vn > 0.0 {
        let (a, b, f, g) = (dot(&d.a, v), dot(&d.b, v), dot(&d.f, v), dot(&d.g, v));
        res = res.max((a - lambda * b - f - g).abs() / vn);
        scale = scale.max((a.abs() + (lambda * b).abs() + f.abs() + g.abs()) / vn);
    }
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

fn euler_dual<P: ScaledProblem + ?Sized>(p: &P, v: &[f64], lambda: f64) -> Vec<f64> {
    let d = p.derivatives(v);
    (0..v.len())
        .map(|k| d.a[k] - lambda * d.b[k] - d.f[k] - d.g[k])
        .collect()
}

/// Newton iteration on `Φ_λ′(v) = 0` at fixed `λ`, started from an approximate
/// solution. The Jacobian is assembled by central differences of the dual
/// derivative. Returns the refined state, or the input when no step reduces
/// the residual.
pub fn newton_polish<P: ScaledProblem + ?Sized>(
    p: &P,
    v: &[f64],
    lambda: f64,
    max_steps: usize,
) -> Vec<f64> {
    let n = v.len();
    let residual_norm = |x: &[f64]| {
        let r = euler_dual(p, x, lambda);
        p.inner(&p.riesz(&r), &r).max(0.0).sqrt()
    };
    let mut x = v.to_vec();
    let mut current = residual_norm(&x);
    let scale = x.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for _ in 0..max_steps {
        let r = euler_dual(p, &x, lambda);
        let h = 1e-6 * scale.max(1e-300);
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut work = x.clone();
        for k in 0..n {
            work[k] = x[k] + h;
            let plus = euler_dual(p, &work, lambda);
            work[k] = x[k] - h;
            let minus = euler_dual(p, &work, lambda);
            work[k] = x[k];
            for i in 0..n {
                jac[(i, k)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        let jac = (&jac + jac.transpose()) * 0.5;
        let Some(step) = jac.lu().solve(&DVector::from_column_slice(&r)) else {
            break;
        };
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a - damping * d)
                .collect();
            let value = residual_norm(&trial);
            if value < current {
                x = trial;
                improved = value < 0.5 * current;
                current = value;
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}
