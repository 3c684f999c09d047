//! The abstract scaled-problem framework.
//!
//! A scaled problem bundles four even potentials `I_s`, `J_s`, `F`, `G` on a
//! state space together with a scaling action `(u, t) -> u_t` under which they
//! are homogeneous of degrees `s`, `s`, `q`, `r`. Everything in this module is
//! written against the [`ScaledProblem`] trait so that the radial
//! Schrödinger–Poisson–Slater model and the 1-D Dirichlet model share the same
//! fiber solver, Nehari quantities and curve formulas.
//!
//! Conventions used throughout:
//!
//! * `lambda_c(u) = (I_s(u) - F(u) - G(u) - c) / J_s(u)` is the energy-prescribed
//!   eigenvalue functional,
//! * the fiber equation for a state `u` is
//!   `H(c, t) = (s - q) t^q F(u) - (r - s) t^r G(u) + c s = 0`,
//! * `Λ̃_c(u) = lambda_c(u_{t_c(u)})` evaluated through the scaling laws, so no
//!   resampling is involved when the reduced functional is computed.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};

/// Scaling degrees of `I_s`/`J_s` (`s`), `F` (`q`) and `G` (`r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub s: f64,
    pub q: f64,
    pub r: f64,
}

impl ScalingExponents {
    pub fn new(s: f64, q: f64, r: f64) -> Result<Self> {
        if !(s.is_finite() && q.is_finite() && r.is_finite()) || !(r > s && s > q && q > 0.0) {
            return Err(NehariError::InvalidConfig(format!(
                "scaling exponents must satisfy r > s > q > 0, got s = {s}, q = {q}, r = {r}"
            )));
        }
        Ok(Self { s, q, r })
    }
}

/// Sign of a potential on nonzero states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    fn admits(self, value: f64) -> bool {
        match self {
            Sign::Positive => value > 0.0,
            Sign::Negative => value < 0.0,
            Sign::Zero => value == 0.0,
        }
    }
}

/// Open half-line of energies on which the fiber equation has a unique root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyInterval {
    /// `(-inf, 0)`
    Negative,
    /// `(0, inf)`
    Positive,
}

impl EnergyInterval {
    pub fn contains(self, c: f64) -> bool {
        match self {
            EnergyInterval::Negative => c < 0.0 && c.is_finite(),
            EnergyInterval::Positive => c > 0.0 && c.is_finite(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EnergyInterval::Negative => "(-inf, 0)",
            EnergyInterval::Positive => "(0, inf)",
        }
    }

    /// `-1` or `+1`.
    pub fn sign(self) -> f64 {
        match self {
            EnergyInterval::Negative => -1.0,
            EnergyInterval::Positive => 1.0,
        }
    }
}

/// The six admissible sign configurations of `(F, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl SignCase {
    pub const ALL: [SignCase; 6] = [
        SignCase::I,
        SignCase::II,
        SignCase::III,
        SignCase::IV,
        SignCase::V,
        SignCase::VI,
    ];

    pub fn interval(self) -> EnergyInterval {
        match self {
            SignCase::I | SignCase::IV | SignCase::V => EnergyInterval::Negative,
            SignCase::II | SignCase::III | SignCase::VI => EnergyInterval::Positive,
        }
    }

    /// Required signs of `(F, G)` on nonzero states.
    pub fn signs(self) -> (Sign, Sign) {
        use Sign::*;
        match self {
            SignCase::I => (Positive, Zero),
            SignCase::II => (Negative, Zero),
            SignCase::III => (Zero, Positive),
            SignCase::IV => (Zero, Negative),
            SignCase::V => (Positive, Negative),
            SignCase::VI => (Negative, Positive),
        }
    }

    pub fn from_signs(f: Sign, g: Sign) -> Option<SignCase> {
        SignCase::ALL
            .into_iter()
            .find(|case| case.signs() == (f, g))
    }

    /// Cases with only one of `F`, `G` present; these admit closed forms.
    pub fn is_pure(self) -> bool {
        matches!(
            self,
            SignCase::I | SignCase::II | SignCase::III | SignCase::IV
        )
    }

    pub fn admits(self, f: f64, g: f64) -> bool {
        let (sf, sg) = self.signs();
        sf.admits(f) && sg.admits(g)
    }
}

impl fmt::Display for SignCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SignCase::I => "I",
            SignCase::II => "II",
            SignCase::III => "III",
            SignCase::IV => "IV",
            SignCase::V => "V",
            SignCase::VI => "VI",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for SignCase {
    type Err = NehariError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(SignCase::I),
            "II" | "2" => Ok(SignCase::II),
            "III" | "3" => Ok(SignCase::III),
            "IV" | "4" => Ok(SignCase::IV),
            "V" | "5" => Ok(SignCase::V),
            "VI" | "6" => Ok(SignCase::VI),
            other => Err(NehariError::InvalidConfig(format!(
                "unknown sign case '{other}'"
            ))),
        }
    }
}

/// `I_s`, `J_s`, `F`, `G` evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionalValues {
    pub i_s: f64,
    pub j_s: f64,
    pub f: f64,
    pub g: f64,
}

/// Fréchet derivatives `A_s(u)`, `B_s(u)`, `f(u)`, `g(u)` as dual (covector)
/// arrays: the pairing with a direction `v` is the plain dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// A discretized scaled variational problem.
///
/// States are node-value arrays of length [`ScaledProblem::dim`]. Implementors
/// must be immutable after construction; every method is a pure function.
pub trait ScaledProblem: Sync {
    fn exponents(&self) -> ScalingExponents;

    /// `None` when both `F` and `G` vanish identically (pure eigenvalue problem).
    fn sign_case(&self) -> Option<SignCase>;

    fn dim(&self) -> usize;

    fn functionals(&self, u: &[f64]) -> FunctionalValues;

    fn derivatives(&self, u: &[f64]) -> Derivatives;

    /// The scaling action `u_t`.
    fn scale(&self, u: &[f64], t: f64) -> Vec<f64>;

    /// Whether `scale` is linear in `u`. Analytic gradients of `Λ̃_c` are
    /// pulled back through the scaling only when this holds.
    fn scaling_is_linear(&self) -> bool {
        true
    }

    /// Inner product of the state space (the Riesz metric of all gradients).
    fn inner(&self, u: &[f64], v: &[f64]) -> f64;

    /// Riesz representative of a dual array with respect to [`Self::inner`].
    fn riesz(&self, dual: &[f64]) -> Vec<f64>;

    /// Norms of the nodal hat functions; used as the weak-residual probe basis.
    fn probe_norms(&self) -> Vec<f64>;

    /// A random smooth nonzero state (not normalized).
    fn random_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Stable one-line description of the discretized problem.
    fn describe(&self) -> String;
}

/// Numerical tolerances of the framework-level operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute bound on `|H(c, t)|` is `fiber * (1 + |c| s)`.
    pub fiber: f64,
    /// Sphere membership `|I_s(u) - 1|`.
    pub sphere: f64,
    /// `I_s(u)` below this is treated as the zero state.
    pub zero: f64,
    /// Scale-relative Nehari residual accepted as membership of `N_c`.
    pub nehari: f64,
    /// `|h(u)[u]| > h_pairing * ||u||` is required for a nondegenerate Nehari set.
    pub h_pairing: f64,
    pub max_fiber_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fiber: 1e-12,
            sphere: 1e-10,
            zero: 1e-14,
            nehari: 1e-8,
            h_pairing: 1e-10,
            max_fiber_iters: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberMethod {
    ClosedForm,
    BisectionNewton,
}

/// The solved fiber time `t_c(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSolution {
    pub t: f64,
    /// `H(c, t)` at the returned time.
    pub residual: f64,
    pub method: FiberMethod,
}

pub fn admissible_energy_interval(case: SignCase) -> EnergyInterval {
    case.interval()
}

fn require_case<P: ScaledProblem + ?Sized>(p: &P) -> Result<SignCase> {
    p.sign_case().ok_or_else(|| {
        NehariError::CaseMismatch("problem has F = G = 0, no sign case is active".to_string())
    })
}

fn nonzero(values: &FunctionalValues, tol: &Tolerances) -> Result<()> {
    if !(values.i_s > tol.zero) || !(values.j_s > 0.0) {
        return Err(NehariError::ZeroState { value: values.i_s });
    }
    Ok(())
}

/// Projects a nonzero state onto the sphere `M_s = {I_s = 1}` along its
/// scaling orbit. Returns `(t_u, u_{t_u})`.
///
/// For scalings that are only approximately exact on the discrete level the
/// time `t_u = I_s(u)^(-1/s)` is refined by a few Newton steps in `ln t`, so
/// that the returned state lies on the discrete sphere to rounding.
pub fn project_to_sphere<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    tol: &Tolerances,
) -> Result<(f64, Vec<f64>)> {
    let s = p.exponents().s;
    let i0 = p.functionals(u).i_s;
    if !(i0 > tol.zero) {
        return Err(NehariError::ZeroState { value: i0 });
    }
    let mut log_t = -i0.ln() / s;
    let mut v = p.scale(u, log_t.exp());
    for _ in 0..8 {
        let i_v = p.functionals(&v).i_s;
        if (i_v - 1.0).abs() <= 1e-14 || !(i_v > 0.0) {
            break;
        }
        log_t -= i_v.ln() / s;
        v = p.scale(u, log_t.exp());
    }
    Ok((log_t.exp(), v))
}

/// `H(c, t) = (s - q) t^q F - (r - s) t^r G + c s`.
pub fn fiber_residual(exps: ScalingExponents, f: f64, g: f64, c: f64, t: f64) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    let mut h = c * s;
    if f != 0.0 {
        h += (s - q) * t.powf(q) * f;
    }
    if g != 0.0 {
        h -= (r - s) * t.powf(r) * g;
    }
    h
}

/// Fiber residual at a state of the problem.
pub fn fiber_residual_at<P: ScaledProblem + ?Sized>(p: &P, u: &[f64], c: f64, t: f64) -> f64 {
    let v = p.functionals(u);
    fiber_residual(p.exponents(), v.f, v.g, c, t)
}

fn fiber_tolerance(exps: ScalingExponents, c: f64, tol: &Tolerances) -> f64 {
    tol.fiber * (1.0 + c.abs() * exps.s)
}

/// Solves the fiber equation `H(c, t) = 0` for the unique positive root given
/// the values of `F(u)` and `G(u)`.
pub fn solve_fiber_values(
    exps: ScalingExponents,
    case: SignCase,
    f: f64,
    g: f64,
    c: f64,
    tol: &Tolerances,
) -> Result<FiberSolution> {
    let interval = case.interval();
    if !interval.contains(c) {
        return Err(NehariError::EnergyOutsideInterval {
            c,
            case,
            interval: interval.label(),
        });
    }
    if !case.admits(f, g) {
        return Err(NehariError::CaseMismatch(format!(
            "F = {f:e}, G = {g:e} violate the sign pattern of case {case}"
        )));
    }
    let ScalingExponents { s, q, r } = exps;
    let limit = fiber_tolerance(exps, c, tol);
    let t = match case {
        SignCase::I | SignCase::II => (-c * s / ((s - q) * f)).powf(1.0 / q),
        SignCase::III | SignCase::IV => (c * s / ((r - s) * g)).powf(1.0 / r),
        SignCase::V | SignCase::VI => {
            return bracket_and_polish(exps, f, g, c, limit, tol.max_fiber_iters);
        }
    };
    let residual = fiber_residual(exps, f, g, c, t);
    if !(t.is_finite() && t > 0.0) || residual.abs() > limit {
        return Err(NehariError::NoConvergence {
            what: "closed-form fiber time",
            iterations: 0,
            residual,
        });
    }
    Ok(FiberSolution {
        t,
        residual,
        method: FiberMethod::ClosedForm,
    })
}

/// Mixed cases: `H(c, .)` is strictly monotone with `H(0+) = c s`, so the root
/// is bracketed by expanding `[2^-20, 1]`, narrowed by bisection and polished by
/// safeguarded Newton steps.
fn bracket_and_polish(
    exps: ScalingExponents,
    f: f64,
    g: f64,
    c: f64,
    limit: f64,
    max_iters: usize,
) -> Result<FiberSolution> {
    let ScalingExponents { s, q, r } = exps;
    let h = |t: f64| fiber_residual(exps, f, g, c, t);
    let dh = |t: f64| q * (s - q) * t.powf(q - 1.0) * f - r * (r - s) * t.powf(r - 1.0) * g;
    // Orient so that `side(t) < 0` below the root.
    let orient = c.signum();
    let below = |t: f64| orient * h(t) > 0.0;

    let mut lo = 2f64.powi(-20);
    let mut hi = 1.0;
    while !below(lo) {
        if lo < 1e-300 {
            return Err(NehariError::NoConvergence {
                what: "fiber bracket",
                iterations: 0,
                residual: h(lo),
            });
        }
        hi = lo;
        lo *= 0.5f64.powi(20);
    }
    while below(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 2f64.powi(40) {
            return Err(NehariError::NoConvergence {
                what: "fiber bracket",
                iterations: 0,
                residual: h(hi),
            });
        }
    }

    let mut iterations = 0;
    while (hi - lo) > 1e-3 * hi && iterations < max_iters {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    // Iterate to rounding level rather than stopping at `limit`: for small |c|
    // the residual scale is flat and `|H| <= limit` alone leaves t inaccurate.
    let mut t = 0.5 * (lo + hi);
    let mut value = h(t);
    while value != 0.0 && iterations < max_iters {
        if below(t) {
            lo = t;
        } else {
            hi = t;
        }
        let slope = dh(t);
        let newton = t - value / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        value = h(t);
        iterations += 1;
        if step <= 2.0 * f64::EPSILON * t || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if value.abs() > limit {
        return Err(NehariError::NoConvergence {
            what: "fiber root",
            iterations,
            residual: value,
        });
    }
    Ok(FiberSolution {
        t,
        residual: value,
        method: FiberMethod::BisectionNewton,
    })
}

/// `t_c(u)` for a state of the problem.
pub fn solve_fiber_time<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<FiberSolution> {
    let case = require_case(p)?;
    let v = p.functionals(u);
    nonzero(&v, tol)?;
    solve_fiber_values(p.exponents(), case, v.f, v.g, c, tol)
}

/// `lambda_c(u) = (I_s - F - G - c) / J_s` from already evaluated functionals.
pub fn lambda_c_from_values(v: &FunctionalValues, c: f64) -> f64 {
    (v.i_s - v.f - v.g - c) / v.j_s
}

pub fn lambda_c_value<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let v = p.functionals(u);
    nonzero(&v, tol)?;
    Ok(lambda_c_from_values(&v, c))
}

/// `Φ_λ(u) = I_s - λ J_s - F - G`.
pub fn phi_lambda_from_values(v: &FunctionalValues, lambda: f64) -> f64 {
    v.i_s - lambda * v.j_s - v.f - v.g
}

pub fn phi_lambda<P: ScaledProblem + ?Sized>(p: &P, u: &[f64], lambda: f64) -> f64 {
    phi_lambda_from_values(&p.functionals(u), lambda)
}

/// `(s - q) F - (r - s) G + c s`; zero exactly on the scaled Nehari set `N_c`.
pub fn nehari_from_values(exps: ScalingExponents, v: &FunctionalValues, c: f64) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    (s - q) * v.f - (r - s) * v.g + c * s
}

/// Nehari residual divided by the magnitude of its three terms.
pub fn nehari_relative_from_values(exps: ScalingExponents, v: &FunctionalValues, c: f64) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    let scale = (s - q) * v.f.abs() + (r - s) * v.g.abs() + c.abs() * s;
    let res = nehari_from_values(exps, v, c);
    if scale > 0.0 {
        res.abs() / scale
    } else {
        res.abs()
    }
}

pub fn nehari_residual<P: ScaledProblem + ?Sized>(p: &P, v: &[f64], c: f64) -> f64 {
    nehari_from_values(p.exponents(), &p.functionals(v), c)
}

/// `Λ_c` restricted to the Nehari set, with `G` eliminated through the
/// Nehari constraint.
pub fn big_lambda_from_values(exps: ScalingExponents, v: &FunctionalValues, c: f64) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    ((r - s) * v.i_s - (r - q) * v.f - c * r) / ((r - s) * v.j_s)
}

pub fn big_lambda_c<P: ScaledProblem + ?Sized>(
    p: &P,
    v: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let values = p.functionals(v);
    nonzero(&values, tol)?;
    let exps = p.exponents();
    let residual = nehari_relative_from_values(exps, &values, c);
    if residual > tol.nehari {
        return Err(NehariError::NotOnNehari { residual });
    }
    Ok(big_lambda_from_values(exps, &values, c))
}

/// The three algebraically equivalent expressions of `Λ̃_c(u)`: the direct
/// one, the one with `G` eliminated and the one with `c` eliminated.
///
/// `I_s(u)` enters explicitly, so on the sphere the leading terms reduce to
/// `1`, `r - s` and `s`.
pub fn lambda_tilde_forms(
    exps: ScalingExponents,
    v: &FunctionalValues,
    c: f64,
    t: f64,
) -> [f64; 3] {
    let ScalingExponents { s, q, r } = exps;
    let f_term = t.powf(q - s) * v.f;
    let g_term = t.powf(r - s) * v.g;
    let c_term = c * t.powf(-s);
    let direct = (v.i_s - f_term - g_term - c_term) / v.j_s;
    let no_g = ((r - s) * v.i_s - (r - q) * f_term - r * c_term) / ((r - s) * v.j_s);
    let no_c = (s * v.i_s - q * f_term - r * g_term) / (s * v.j_s);
    [direct, no_g, no_c]
}

/// `Λ̃_c(u)` together with the fiber solution it was evaluated at.
pub fn lambda_tilde<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<(f64, FiberSolution)> {
    let values = p.functionals(u);
    nonzero(&values, tol)?;
    let case = require_case(p)?;
    let exps = p.exponents();
    let fiber = solve_fiber_values(exps, case, values.f, values.g, c, tol)?;
    Ok((lambda_tilde_forms(exps, &values, c, fiber.t)[0], fiber))
}

/// `∂Λ̃_c(u)/∂c = -t_c(u)^(-s) / J_s(u)`; always negative.
pub fn dlambda_tilde_dc<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let values = p.functionals(u);
    nonzero(&values, tol)?;
    let fiber = solve_fiber_values(p.exponents(), require_case(p)?, values.f, values.g, c, tol)?;
    Ok(-fiber.t.powf(-p.exponents().s) / values.j_s)
}

/// Closed forms of `Λ̃_c` in the four pure cases, from functional values.
pub fn closed_form_from_values(
    exps: ScalingExponents,
    case: SignCase,
    v: &FunctionalValues,
    c: f64,
) -> Result<f64> {
    let ScalingExponents { s, q, r } = exps;
    let interval = case.interval();
    if !interval.contains(c) {
        return Err(NehariError::EnergyOutsideInterval {
            c,
            case,
            interval: interval.label(),
        });
    }
    let psi = v.i_s / v.j_s;
    let value = match case {
        SignCase::I => {
            psi - (q / s) * ((s - q) / (c.abs() * s)).powf((s - q) / q) * v.f.powf(s / q) / v.j_s
        }
        SignCase::III => {
            psi - (r / s) * (c * s / (r - s)).powf((r - s) / r) * v.g.powf(s / r) / v.j_s
        }
        SignCase::II => {
            psi + (q / s) * ((s - q) / (c * s)).powf((s - q) / q) * v.f.abs().powf(s / q) / v.j_s
        }
        SignCase::IV => {
            psi + (r / s) * (c.abs() * s / (r - s)).powf((r - s) / r) * v.g.abs().powf(s / r)
                / v.j_s
        }
        SignCase::V | SignCase::VI => {
            return Err(NehariError::CaseMismatch(format!(
                "no closed form for mixed case {case}"
            )));
        }
    };
    Ok(value)
}

pub fn closed_form_lambda_tilde<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let values = p.functionals(u);
    nonzero(&values, tol)?;
    closed_form_from_values(p.exponents(), require_case(p)?, &values, c)
}

/// `Ψ̃(u) = 1 / J_s(u)` on the sphere.
pub fn psi_tilde<P: ScaledProblem + ?Sized>(p: &P, u: &[f64], tol: &Tolerances) -> Result<f64> {
    let values = p.functionals(u);
    nonzero(&values, tol)?;
    if (values.i_s - 1.0).abs() > tol.sphere {
        return Err(NehariError::NotOnSphere { value: values.i_s });
    }
    Ok(1.0 / values.j_s)
}

/// `s α I_s - s β J_s - q γ F - r δ G`, which vanishes on every solution of
/// `α A_s(u) = β B_s(u) + γ f(u) + δ g(u)`.
pub fn pohozaev_from_values(
    exps: ScalingExponents,
    v: &FunctionalValues,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> f64 {
    let ScalingExponents { s, q, r } = exps;
    s * alpha * v.i_s - s * beta * v.j_s - q * gamma * v.f - r * delta * v.g
}

pub fn pohozaev_residual<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> f64 {
    pohozaev_from_values(p.exponents(), &p.functionals(u), alpha, beta, gamma, delta)
}

/// `h(u)[u] = (s - q) f(u)u - (r - s) g(u)u`, the nondegeneracy pairing.
pub fn h_pairing<P: ScaledProblem + ?Sized>(p: &P, u: &[f64]) -> f64 {
    let ScalingExponents { s, q, r } = p.exponents();
    let d = p.derivatives(u);
    (s - q) * dot(&d.f, u) - (r - s) * dot(&d.g, u)
}

/// Dual array of `lambda_c'(u) = [A_s(u) - λ_c(u) B_s(u) - f(u) - g(u)] / J_s(u)`.
pub fn lambda_c_dual<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let values = p.functionals(u);
    nonzero(&values, tol)?;
    let lambda = lambda_c_from_values(&values, c);
    let d = p.derivatives(u);
    Ok((0..u.len())
        .map(|i| (d.a[i] - lambda * d.b[i] - d.f[i] - d.g[i]) / values.j_s)
        .collect())
}

/// Riesz representative of `lambda_c'(u)`.
pub fn grad_lambda_c<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    Ok(p.riesz(&lambda_c_dual(p, u, c, tol)?))
}

/// `Λ̃_c(u)` and the dual array of its derivative.
///
/// With a linear scaling, `λ_c(u_t)` can be written through the scaling laws
/// as `(t^s I_s(u) - t^q F(u) - t^r G(u) - c) / (t^s J_s(u))`. Its `t`-derivative
/// vanishes at `t = t_c(u)`, so only the explicit `u`-dependence contributes:
/// `[A_s(u) - t^(q-s) f(u) - t^(r-s) g(u) - Λ̃ B_s(u)] / J_s(u)`.
/// Nonlinear scalings fall back to central differences along the nodal basis.
pub fn lambda_tilde_dual<P: ScaledProblem + ?Sized>(
    p: &P,
    u: &[f64],
    c: f64,
    tol: &Tolerances,
) -> Result<(f64, FiberSolution, Vec<f64>)> {
    let (value, fiber) = lambda_tilde(p, u, c, tol)?;
    if !p.scaling_is_linear() {
        let mut dual = vec![0.0; u.len()];
        let mut work = u.to_vec();
        let h = 1e-6 * p.norm(u).max(1e-12);
        for k in 0..u.len() {
            work[k] = u[k] + h;
            let plus = lambda_tilde(p, &work, c, tol)?.0;
            work[k] = u[k] - h;
            let minus = lambda_tilde(p, &work, c, tol)?.0;
            work[k] = u[k];
            dual[k] = (plus - minus) / (2.0 * h);
        }
        return Ok((value, fiber, dual));
    }
    let ScalingExponents { s, q, r } = p.exponents();
    let values = p.functionals(u);
    let d = p.derivatives(u);
    let wf = fiber.t.powf(q - s);
    let wg = fiber.t.powf(r - s);
    let dual = (0..u.len())
        .map(|i| (d.a[i] - wf * d.f[i] - wg * d.g[i] - value * d.b[i]) / values.j_s)
        .collect();
    Ok((value, fiber, dual))
}

/// Removes from a Riesz gradient its component normal to the level set
/// `{I_s = const}` through `u`. `a_riesz` is the Riesz representative of
/// `A_s(u)`.
pub fn tangent_project<P: ScaledProblem + ?Sized>(
    p: &P,
    grad: &[f64],
    a_riesz: &[f64],
) -> Vec<f64> {
    let aa = p.inner(a_riesz, a_riesz);
    if !(aa > 0.0) {
        return grad.to_vec();
    }
    let coef = p.inner(grad, a_riesz) / aa;
    grad.iter()
        .zip(a_riesz)
        .map(|(g, a)| g - coef * a)
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
