//! Energy curves `c ↦ λ_{c,1}`, prescribed-λ intersections, tail fits and
//! nonexistence scans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};
use crate::optimizer::{minimize_lambda_tilde, newton_polish, MinimizeReport, SolverConfig};
use crate::scaled::{
    dlambda_tilde_dc, nehari_residual, phi_lambda, EnergyInterval, ScaledProblem, SignCase,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "message")]
pub enum PointStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub c: f64,
    /// `λ_{c,1}` estimate; NaN for failed points.
    pub lambda: f64,
    /// Index of the minimizer in [`Curve::states`].
    pub minimizer_ref: Option<usize>,
    pub grad_norm: f64,
    pub fiber_t: f64,
    /// `∂Λ̃_c/∂c` at the minimizer.
    pub dlambda_dc: f64,
    pub status: PointStatus,
}

impl CurvePoint {
    pub fn is_ok(&self) -> bool {
        self.status == PointStatus::Ok
    }

    fn failed(c: f64, message: String) -> Self {
        Self {
            c,
            lambda: f64::NAN,
            minimizer_ref: None,
            grad_norm: f64::NAN,
            fiber_t: f64::NAN,
            dlambda_dc: f64::NAN,
            status: PointStatus::Failed(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub case: SignCase,
    /// Ordered by increasing `c`.
    pub points: Vec<CurvePoint>,
    pub fingerprint: String,
    /// Indices `i` with `λ(c_{i+1}) > λ(c_i) + tol_mono` among successful neighbours.
    pub monotonicity_violations: Vec<usize>,
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
}

impl Curve {
    pub fn ok_points(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.is_ok())
    }

    pub fn failed_count(&self) -> usize {
        self.points.len() - self.ok_points().count()
    }

    pub fn state(&self, point: &CurvePoint) -> Option<&[f64]> {
        point.minimizer_ref.map(|k| self.states[k].as_slice())
    }
}

/// `1e-4 (1 + |λ|)`.
pub fn tol_mono(lambda: f64) -> f64 {
    1e-4 * (1.0 + lambda.abs())
}

/// Whether `λ_{c,1}` tends to `λ₁` at the small-`|c|` end of the interval
/// (cases III, IV) rather than at the large-`|c|` end.
fn regular_end_is_small(case: SignCase) -> bool {
    matches!(case, SignCase::III | SignCase::IV)
}

fn check_grid(case: SignCase, c_grid: &[f64]) -> Result<()> {
    if c_grid.is_empty() {
        return Err(NehariError::InvalidConfig(
            "energy grid is empty".to_string(),
        ));
    }
    let increasing = c_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = c_grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(NehariError::InvalidConfig(
            "energy grid must be strictly monotone".to_string(),
        ));
    }
    let interval = case.interval();
    if let Some(&c) = c_grid.iter().find(|c| !interval.contains(**c)) {
        return Err(NehariError::EnergyOutsideInterval {
            c,
            case,
            interval: interval.label(),
        });
    }
    Ok(())
}

fn solve_point<P: ScaledProblem + ?Sized>(
    p: &P,
    c: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<(MinimizeReport, f64)> {
    let report = minimize_lambda_tilde(p, c, cfg, warm)?;
    let slope = dlambda_tilde_dc(p, &report.minimizer, c, &cfg.tolerances)?;
    Ok((report, slope))
}

/// Traces `C_1` over `c_grid` with warm-started continuation from the end
/// where `λ_{c,1} → λ₁` toward the singular end.
pub fn trace_curve<P: ScaledProblem + ?Sized>(
    p: &P,
    c_grid: &[f64],
    cfg: &SolverConfig,
) -> Result<Curve> {
    let case = p.sign_case().ok_or_else(|| {
        NehariError::CaseMismatch("energy curves need an active sign case".to_string())
    })?;
    check_grid(case, c_grid)?;
    cfg.validate()?;
    let mut order: Vec<f64> = c_grid.to_vec();
    order.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if !regular_end_is_small(case) {
        order.reverse();
    }

    let mut states = Vec::new();
    let mut points = Vec::with_capacity(order.len());
    let mut warm: Option<Vec<f64>> = None;
    for c in order {
        match solve_point(p, c, cfg, warm.as_deref()) {
            Ok((report, slope)) => {
                states.push(report.minimizer.clone());
                warm = Some(report.minimizer);
                points.push(CurvePoint {
                    c,
                    lambda: report.value,
                    minimizer_ref: Some(states.len() - 1),
                    grad_norm: report.grad_norm,
                    fiber_t: report.fiber_t.unwrap_or(f64::NAN),
                    dlambda_dc: slope,
                    status: PointStatus::Ok,
                });
            }
            Err(e) => points.push(CurvePoint::failed(c, e.to_string())),
        }
    }
    points.sort_by(|a, b| a.c.total_cmp(&b.c));
    let monotonicity_violations = monotonicity_violations(&points);
    Ok(Curve {
        case,
        points,
        fingerprint: p.describe(),
        monotonicity_violations,
        states,
    })
}

fn monotonicity_violations(points: &[CurvePoint]) -> Vec<usize> {
    let ok: Vec<usize> = (0..points.len()).filter(|&i| points[i].is_ok()).collect();
    ok.windows(2)
        .filter(|w| points[w[1]].lambda > points[w[0]].lambda + tol_mono(points[w[0]].lambda))
        .map(|w| w[0])
        .collect()
}

/// A point of `C_1` at which `λ_{c,1}` equals the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub c: f64,
    pub point: CurvePoint,
    pub probes: usize,
    #[serde(skip)]
    pub minimizer: Vec<f64>,
    /// `u*_{t_c(u*)}`, a solution with `λ ≈ λ_target` and energy `c`.
    #[serde(skip)]
    pub state: Vec<f64>,
}

/// Locates `c*` with `|λ_{c*,1} − λ_target| ≤ tol_lambda` by safeguarded
/// Newton steps inside a bracketing pair of curve points (the slope is
/// `∂Λ̃_c/∂c` at the minimizer). Returns `None` when the target is not
/// crossed by the traced curve.
pub fn intersect_with_lambda<P: ScaledProblem + ?Sized>(
    p: &P,
    curve: &Curve,
    lambda_target: f64,
    tol_lambda: f64,
    cfg: &SolverConfig,
) -> Result<Option<Intersection>> {
    let ok: Vec<&CurvePoint> = curve.ok_points().collect();
    if ok.len() < 2 {
        return Err(NehariError::InvalidConfig(
            "intersection needs at least two solved curve points".to_string(),
        ));
    }
    if let Some(hit) = ok
        .iter()
        .find(|pt| (pt.lambda - lambda_target).abs() <= tol_lambda)
    {
        let minimizer = curve.state(hit).expect("solved point").to_vec();
        let state = p.scale(&minimizer, hit.fiber_t);
        return Ok(Some(Intersection {
            c: hit.c,
            point: (*hit).clone(),
            probes: 0,
            minimizer,
            state,
        }));
    }
    let Some(pair) = ok
        .windows(2)
        .find(|w| (w[0].lambda - lambda_target) * (w[1].lambda - lambda_target) < 0.0)
    else {
        return Ok(None);
    };
    // g(c) = λ_{c,1} − target, with g(lo) and g(hi) of opposite signs.
    let (mut lo, mut hi) = (pair[0].clone(), pair[1].clone());
    let mut warm = curve.state(&lo).expect("solved point").to_vec();
    let mut best = if (lo.lambda - lambda_target).abs() < (hi.lambda - lambda_target).abs() {
        lo.clone()
    } else {
        hi.clone()
    };
    let max_probes = 80;
    for probe in 1..=max_probes {
        let newton = best.c - (best.lambda - lambda_target) / best.dlambda_dc;
        let inside = newton > lo.c.min(hi.c) && newton < lo.c.max(hi.c) && newton.is_finite();
        let c = if inside && probe % 4 != 0 {
            newton
        } else if lo.c * hi.c > 0.0 {
            lo.c.signum() * (lo.c * hi.c).sqrt()
        } else {
            0.5 * (lo.c + hi.c)
        };
        let (report, slope) = solve_point(p, c, cfg, Some(&warm))?;
        let point = CurvePoint {
            c,
            lambda: report.value,
            minimizer_ref: None,
            grad_norm: report.grad_norm,
            fiber_t: report.fiber_t.unwrap_or(f64::NAN),
            dlambda_dc: slope,
            status: PointStatus::Ok,
        };
        if (point.lambda - lambda_target).abs() <= tol_lambda {
            let state = p.scale(&report.minimizer, point.fiber_t);
            return Ok(Some(Intersection {
                c,
                point,
                probes: probe,
                minimizer: report.minimizer,
                state,
            }));
        }
        if (point.lambda - lambda_target) * (lo.lambda - lambda_target) > 0.0 {
            lo = point.clone();
        } else {
            hi = point.clone();
        }
        warm = report.minimizer;
        best = point;
    }
    Err(NehariError::NoConvergence {
        what: "prescribed-lambda intersection",
        iterations: max_probes,
        residual: best.lambda - lambda_target,
    })
}

/// Newton-refines the intersection state at fixed `λ = λ_target` and returns
/// it with its energy `c* = Φ_λ(v)`.
pub fn refine_intersection<P: ScaledProblem + ?Sized>(
    p: &P,
    intersection: &Intersection,
    lambda_target: f64,
) -> (Vec<f64>, f64) {
    let v = newton_polish(p, &intersection.state, lambda_target, 12);
    let c = phi_lambda(p, &v, lambda_target);
    (v, c)
}

/// Whether `λ_target ≤ λ₁` rules out every solution: cases II and IV.
pub fn certified_nonexistence(case: SignCase, lambda_target: f64, lambda1: f64) -> bool {
    matches!(case, SignCase::II | SignCase::IV) && lambda_target <= lambda1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteFit {
    pub limit: f64,
    /// Positive exponent `e` with `|λ − limit| ∝ |c|^{∓e}` toward the regular end.
    pub rate: f64,
    pub prefactor: f64,
    pub tail_points: usize,
    pub rms_residual: f64,
}

pub const MIN_TAIL_POINTS: usize = 6;

/// Least-squares fit of `λ = L + K |c|^p` on the tail of the curve at its
/// regular end (small `|c|` in cases III, IV; large `|c|` otherwise).
/// The exponent is scanned on a grid and refined by golden-section search;
/// `L` and `K` are linear.
pub fn fit_asymptote(curve: &Curve) -> Result<AsymptoteFit> {
    let mut ok: Vec<&CurvePoint> = curve.ok_points().collect();
    ok.sort_by(|a, b| a.c.abs().total_cmp(&b.c.abs()));
    let small_end = regular_end_is_small(curve.case);
    if !small_end {
        ok.reverse();
    }
    let tail_len = (ok.len() / 2).max(MIN_TAIL_POINTS.min(ok.len()));
    if tail_len < MIN_TAIL_POINTS {
        return Err(NehariError::InsufficientTail {
            needed: MIN_TAIL_POINTS,
            got: tail_len,
        });
    }
    let tail: Vec<(f64, f64)> = ok[..tail_len]
        .iter()
        .map(|pt| (pt.c.abs(), pt.lambda))
        .collect();
    let spread = tail
        .iter()
        .fold(0.0f64, |m, (_, l)| m.max((l - tail[0].1).abs()));
    if spread <= 1e-12 * (1.0 + tail[0].1.abs()) {
        return Err(NehariError::DegenerateFit(
            "λ is constant on the tail".to_string(),
        ));
    }
    // Toward large |c| the correction decays like |c|^p with p < 0; toward
    // small |c| like |c|^p with p > 0.
    let sign = if small_end { 1.0 } else { -1.0 };
    let sse = |e: f64| linear_fit(&tail, sign * e).2;
    let grid: Vec<f64> = (1..=300).map(|k| k as f64 * 0.01).collect();
    let (mut best_e, mut best) = (grid[0], f64::INFINITY);
    for &e in &grid {
        let v = sse(e);
        if v < best {
            best = v;
            best_e = e;
        }
    }
    let (mut a, mut b) = ((best_e - 0.01).max(1e-4), best_e + 0.01);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if sse(x1) < sse(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let rate = 0.5 * (a + b);
    if rate >= 2.99 {
        return Err(NehariError::DegenerateFit(format!(
            "exponent search hit its upper bound ({rate})"
        )));
    }
    let (limit, prefactor, sse_final) = linear_fit(&tail, sign * rate);
    Ok(AsymptoteFit {
        limit,
        rate,
        prefactor,
        tail_points: tail_len,
        rms_residual: (sse_final / tail_len as f64).sqrt(),
    })
}

/// `(L, K, SSE)` of `λ ≈ L + K x^p`.
fn linear_fit(data: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let n = data.len() as f64;
    let xs: Vec<f64> = data.iter().map(|(c, _)| c.powf(p)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = data.iter().map(|(_, l)| l).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(data)
        .map(|(x, (_, l))| (x - mx) * (l - my))
        .sum();
    let k = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let l = my - k * mx;
    let sse = xs
        .iter()
        .zip(data)
        .map(|(x, (_, y))| (y - l - k * x).powi(2))
        .sum();
    (l, k, sse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceScan {
    pub c: f64,
    /// `N_c = ∅`: `c` lies outside the admissible interval and every sample
    /// agrees on the sign of the Nehari residual.
    pub empty: bool,
    pub outside_interval: bool,
    pub samples: usize,
    /// Samples whose Nehari residual has the sign of the first one.
    pub agreeing: usize,
    /// `+1` or `−1` when unanimous, otherwise `0`.
    pub residual_sign: f64,
}

/// Decides whether the scaled Nehari set at energy `c` is empty and
/// corroborates the decision on `samples` random states.
pub fn nonexistence_scan<P: ScaledProblem + ?Sized>(
    p: &P,
    c: f64,
    samples: usize,
    seed: u64,
) -> NonexistenceScan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outside_interval = match p.sign_case() {
        Some(case) => !case.interval().contains(c),
        None => c != 0.0,
    };
    let signs: Vec<f64> = (0..samples)
        .map(|_| {
            let u = p.random_state(&mut rng);
            let res = nehari_residual(p, &u, c);
            if res > 0.0 {
                1.0
            } else if res < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    let first = signs.first().copied().unwrap_or(0.0);
    let agreeing = signs
        .iter()
        .filter(|s| **s == first && first != 0.0)
        .count();
    let unanimous = samples > 0 && agreeing == samples;
    let empty = outside_interval && unanimous;
    NonexistenceScan {
        c,
        empty,
        outside_interval,
        samples,
        agreeing,
        residual_sign: if unanimous { first } else { 0.0 },
    }
}

/// `n` energies spanning `[c_min, c_max]`, linearly or logarithmically in `|c|`.
pub fn energy_grid(c_min: f64, c_max: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if !(c_min < c_max) || count < 2 || !c_min.is_finite() || !c_max.is_finite() {
        return Err(NehariError::InvalidConfig(format!(
            "energy sweep needs c_min < c_max and at least two points, got [{c_min}, {c_max}] x {count}"
        )));
    }
    if c_min < 0.0 && c_max > 0.0 || c_min == 0.0 || c_max == 0.0 {
        return Err(NehariError::InvalidConfig(format!(
            "energy sweep [{c_min}, {c_max}] must not contain or touch c = 0"
        )));
    }
    let steps = (count - 1) as f64;
    let grid = if log {
        let (a, b) = (c_min.abs().ln(), c_max.abs().ln());
        let sign = c_min.signum();
        let mut g: Vec<f64> = (0..count)
            .map(|k| sign * (a + (b - a) * k as f64 / steps).exp())
            .collect();
        g.sort_by(f64::total_cmp);
        g[0] = c_min;
        g[count - 1] = c_max;
        g
    } else {
        (0..count)
            .map(|k| c_min + (c_max - c_min) * k as f64 / steps)
            .collect()
    };
    Ok(grid)
}

/// The admissible half-line a sweep must stay in.
pub fn sweep_interval(case: SignCase) -> EnergyInterval {
    case.interval()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{DirichletParams, DirichletProblem, IntervalGrid};

    fn problem(mu: f64, nu: f64) -> DirichletProblem {
        DirichletProblem::new(
            IntervalGrid::new(63).unwrap(),
            DirichletParams {
                sigma: 1.5,
                tau: 4.0,
                mu,
                nu,
            },
        )
        .unwrap()
    }

    fn quick() -> SolverConfig {
        SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        }
    }

    fn synthetic(case: SignCase, data: &[(f64, f64)]) -> Curve {
        let points = data
            .iter()
            .map(|&(c, lambda)| CurvePoint {
                c,
                lambda,
                minimizer_ref: None,
                grad_norm: 0.0,
                fiber_t: 1.0,
                dlambda_dc: -1.0,
                status: PointStatus::Ok,
            })
            .collect();
        Curve {
            case,
            points,
            fingerprint: String::new(),
            monotonicity_violations: vec![],
            states: vec![],
        }
    }

    #[test]
    fn energy_grids() {
        let g = energy_grid(-100.0, -0.01, 5, true).unwrap();
        assert_eq!(g.len(), 5);
        assert!(
            (g[0] + 100.0).abs() < 1e-12
                && (g[4] + 0.01).abs() < 1e-15
                && (g[2] + 1.0).abs() < 1e-12
        );
        assert!(energy_grid(-1.0, 1.0, 5, false).is_err());
        assert!(energy_grid(0.0, 1.0, 5, true).is_err());
        assert_eq!(
            energy_grid(1.0, 3.0, 3, false).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn grids_outside_the_interval_are_rejected() {
        let p = problem(1.0, 0.0);
        assert!(matches!(
            trace_curve(&p, &[-1.0, 0.5], &quick()),
            Err(NehariError::InvalidConfig(_)) | Err(NehariError::EnergyOutsideInterval { .. })
        ));
        assert!(trace_curve(&p, &[-1.0, -2.0, -0.5], &quick()).is_err());
    }

    #[test]
    fn synthetic_power_law_is_recovered() {
        let data: Vec<(f64, f64)> = (0..12)
            .map(|k| -(10f64).powf(1.0 + 0.5 * k as f64))
            .map(|c| (c, 3.0 - 2.0 * c.abs().powf(-0.25)))
            .collect();
        let fit = fit_asymptote(&synthetic(SignCase::I, &data)).unwrap();
        assert!((fit.rate - 0.25).abs() < 1e-6, "{fit:?}");
        assert!((fit.limit - 3.0).abs() < 1e-8);
        let small: Vec<(f64, f64)> = (0..12)
            .map(|k| (10f64).powf(-4.0 + 0.3 * k as f64))
            .map(|c| (c, 5.0 - c.powf(0.4)))
            .collect();
        let fit = fit_asymptote(&synthetic(SignCase::III, &small)).unwrap();
        assert!((fit.rate - 0.4).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn constant_or_short_curves_are_rejected() {
        let flat: Vec<(f64, f64)> = (1..=12).map(|k| (-(k as f64), 2.0)).collect();
        assert!(matches!(
            fit_asymptote(&synthetic(SignCase::I, &flat)),
            Err(NehariError::DegenerateFit(_))
        ));
        let short: Vec<(f64, f64)> = (1..=4).map(|k| (-(k as f64), 2.0 / k as f64)).collect();
        assert!(matches!(
            fit_asymptote(&synthetic(SignCase::I, &short)),
            Err(NehariError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn nonexistence_examples() {
        let case_one = problem(1.0, 0.0);
        assert!(nonexistence_scan(&case_one, 0.5, 100, 1).empty);
        assert!(!nonexistence_scan(&case_one, -1.0, 100, 1).empty);
        let case_six = problem(-1.0, 1.0);
        assert!(nonexistence_scan(&case_six, -1.0, 100, 1).empty);
        assert!(certified_nonexistence(SignCase::II, 1.0, 9.8));
        assert!(!certified_nonexistence(SignCase::I, 1.0, 9.8));
    }

    #[test]
    fn traced_dirichlet_curve_decreases_and_intersects() {
        let p = problem(1.0, 0.0);
        let grid = energy_grid(-10.0, -0.1, 6, true).unwrap();
        let curve = trace_curve(&p, &grid, &quick()).unwrap();
        assert_eq!(curve.failed_count(), 0);
        assert!(
            curve.monotonicity_violations.is_empty(),
            "{:?}",
            curve.points
        );
        let ok: Vec<&CurvePoint> = curve.ok_points().collect();
        let target = 0.5 * (ok[1].lambda + ok[3].lambda);
        let hit = intersect_with_lambda(&p, &curve, target, 1e-10, &quick())
            .unwrap()
            .unwrap();
        assert!((hit.point.lambda - target).abs() <= 1e-10);
        assert!(hit.c > ok[1].c && hit.c < ok[3].c);
        let above = ok.iter().map(|pt| pt.lambda).fold(f64::MIN, f64::max) + 1.0;
        assert!(intersect_with_lambda(&p, &curve, above, 1e-10, &quick())
            .unwrap()
            .is_none());
    }
}
