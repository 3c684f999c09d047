//! Radial Schrödinger–Poisson–Slater instantiation.
//!
//! `I(u) = ½∫|∇u|² + (1/16π) D(u)`, `J(u) = ⅓∫|u|³`,
//! `F(u) = ±(1/σ)∫|u|^σ`, `G(u) = ±(1/τ)∫|u|^τ`, with scaling
//! `u_t(x) = t² u(t x)` and degrees `s = 3`, `q = 2σ − 3`, `r = 2τ − 3`.
//!
//! All pairings `A_s(u)v`, `B_s(u)v`, `f(u)v`, `g(u)v` are the exact
//! derivatives of the discrete potentials, so the discrete problem is a
//! finite-dimensional variational problem in its own right.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};
use crate::radial::RadialGrid;
use crate::scaled::{
    Derivatives, FunctionalValues, ScaledProblem, ScalingExponents, Sign, SignCase,
};

pub const SIGMA_WINDOW: (f64, f64) = (18.0 / 7.0, 3.0);
pub const TAU_WINDOW: (f64, f64) = (3.0, 6.0);

/// `q` and `r` used for an absent power term. Any value with `r > 3 > q`
/// gives identical results because the matching potential is identically zero.
pub const DORMANT_SIGMA: f64 = 2.75;
pub const DORMANT_TAU: f64 = 4.5;

/// One signed power term `sign · (1/p) ∫|u|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub exponent: f64,
    /// `+1` or `-1`.
    pub sign: f64,
}

/// Local nonlinearity `g(u) = ±|u|^{σ-2}u ± |u|^{τ-2}u`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpsNonlinearity {
    pub sub: Option<PowerTerm>,
    pub sup: Option<PowerTerm>,
}

impl SpsNonlinearity {
    pub fn new(sub: Option<PowerTerm>, sup: Option<PowerTerm>) -> Result<Self> {
        if let Some(t) = sub {
            if !(t.exponent > SIGMA_WINDOW.0 && t.exponent < SIGMA_WINDOW.1) {
                return Err(NehariError::InvalidConfig(format!(
                    "sigma = {} is outside the subscaled window (18/7, 3)",
                    t.exponent
                )));
            }
            check_sign(t.sign, "sigma")?;
        }
        if let Some(t) = sup {
            if !(t.exponent > TAU_WINDOW.0 && t.exponent < TAU_WINDOW.1) {
                return Err(NehariError::InvalidConfig(format!(
                    "tau = {} is outside the superscaled window (3, 6)",
                    t.exponent
                )));
            }
            check_sign(t.sign, "tau")?;
        }
        let nl = Self { sub, sup };
        if sub.is_some() && sup.is_some() && nl.sign_case().is_none() {
            return Err(NehariError::InvalidConfig(
                "sigma and tau terms with equal signs match none of the six sign cases".to_string(),
            ));
        }
        Ok(nl)
    }

    /// The active case, `None` for the pure eigenvalue problem.
    pub fn sign_case(&self) -> Option<SignCase> {
        let sign_of = |t: Option<PowerTerm>| match t {
            None => Sign::Zero,
            Some(t) if t.sign > 0.0 => Sign::Positive,
            Some(_) => Sign::Negative,
        };
        SignCase::from_signs(sign_of(self.sub), sign_of(self.sup))
    }

    /// Nonlinearity realizing a sign case with the given exponents.
    pub fn for_case(case: SignCase, sigma: f64, tau: f64) -> Result<Self> {
        let term = |exponent, sign: Sign| match sign {
            Sign::Zero => None,
            Sign::Positive => Some(PowerTerm {
                exponent,
                sign: 1.0,
            }),
            Sign::Negative => Some(PowerTerm {
                exponent,
                sign: -1.0,
            }),
        };
        let (fs, gs) = case.signs();
        Self::new(term(sigma, fs), term(tau, gs))
    }

    pub fn exponents(&self) -> ScalingExponents {
        let sigma = self.sub.map_or(DORMANT_SIGMA, |t| t.exponent);
        let tau = self.sup.map_or(DORMANT_TAU, |t| t.exponent);
        ScalingExponents {
            s: 3.0,
            q: 2.0 * sigma - 3.0,
            r: 2.0 * tau - 3.0,
        }
    }
}

fn check_sign(sign: f64, name: &str) -> Result<()> {
    if sign == 1.0 || sign == -1.0 {
        Ok(())
    } else {
        Err(NehariError::InvalidConfig(format!(
            "sign of the {name} term must be +1 or -1, got {sign}"
        )))
    }
}

/// Node values on a shared radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NehariError::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NehariError::InvalidConfig(
                "radial function has non-finite values".to_string(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }
}

/// Residuals of the two identities behind the Pohozaev-type relation:
/// the Euler identity (testing the equation with `u`) and the Pohozaev
/// identity proper. `(2/3)·euler − (1/3)·pohozaev`, multiplied by `s = 3`,
/// equals the framework residual `3αI − 3βJ − qγF − rδG`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsIdentityResiduals {
    pub euler_residual: f64,
    pub pohozaev_residual: f64,
}

impl SpsIdentityResiduals {
    pub fn combined(&self) -> f64 {
        2.0 / 3.0 * self.euler_residual - self.pohozaev_residual / 3.0
    }
}

#[derive(Debug, Clone)]
pub struct SpsProblem {
    grid: Arc<RadialGrid>,
    nonlinearity: SpsNonlinearity,
    /// `4π r_{i+½} / h`: coefficients of `∫|∇u|² = Σ k_i (u_{i+1} − u_i)²`.
    stiffness: Vec<f64>,
}

impl SpsProblem {
    pub fn new(grid: Arc<RadialGrid>, nonlinearity: SpsNonlinearity) -> Self {
        let h = grid.log_step();
        let stiffness = grid
            .nodes()
            .windows(2)
            .map(|w| 4.0 * PI * (w[0] * w[1]).sqrt() / h)
            .collect();
        Self {
            grid,
            nonlinearity,
            stiffness,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn nonlinearity(&self) -> &SpsNonlinearity {
        &self.nonlinearity
    }

    /// `∫|∇u|² dx`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        self.stiffness
            .iter()
            .zip(u.windows(2))
            .map(|(k, w)| k * (w[1] - w[0]).powi(2))
            .sum()
    }

    /// Newton potential `φ_i = ∫ u²(y) / max(r_i, |y|) dy` by prefix/suffix sums.
    pub fn hartree_potential(&self, u: &[f64]) -> Vec<f64> {
        let r = self.grid.nodes();
        let w = self.grid.weights();
        let n = u.len();
        let charge: Vec<f64> = (0..n).map(|i| w[i] * u[i] * u[i]).collect();
        let mut phi = vec![0.0; n];
        let mut outer = 0.0;
        for i in (0..n).rev() {
            phi[i] = outer;
            outer += charge[i] / r[i];
        }
        let mut inner = 0.0;
        for i in 0..n {
            inner += charge[i];
            phi[i] += inner / r[i];
        }
        phi
    }

    /// `D(u) = ∫∫ u²(x) u²(y) / |x − y| dx dy`.
    pub fn coulomb_energy(&self, u: &[f64]) -> f64 {
        let phi = self.hartree_potential(u);
        let w = self.grid.weights();
        (0..u.len()).map(|i| w[i] * u[i] * u[i] * phi[i]).sum()
    }

    pub fn eval_i(&self, u: &[f64]) -> f64 {
        0.5 * self.dirichlet_energy(u) + self.coulomb_energy(u) / (16.0 * PI)
    }

    pub fn eval_j(&self, u: &[f64]) -> f64 {
        self.power_integral(u, 3.0) / 3.0
    }

    pub fn eval_f(&self, u: &[f64]) -> f64 {
        self.term_value(self.nonlinearity.sub, u)
    }

    pub fn eval_g(&self, u: &[f64]) -> f64 {
        self.term_value(self.nonlinearity.sup, u)
    }

    fn power_integral(&self, u: &[f64], p: f64) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(u)
            .map(|(w, v)| w * v.abs().powf(p))
            .sum()
    }

    fn term_value(&self, term: Option<PowerTerm>, u: &[f64]) -> f64 {
        term.map_or(0.0, |t| {
            t.sign * self.power_integral(u, t.exponent) / t.exponent
        })
    }

    fn term_dual(&self, term: Option<PowerTerm>, u: &[f64]) -> Vec<f64> {
        let w = self.grid.weights();
        match term {
            None => vec![0.0; u.len()],
            Some(t) => u
                .iter()
                .zip(w)
                .map(|(v, w)| t.sign * w * v.abs().powf(t.exponent - 2.0) * v)
                .collect(),
        }
    }

    fn a_dual(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut a = vec![0.0; n];
        for (i, k) in self.stiffness.iter().enumerate() {
            let flux = k * (u[i + 1] - u[i]);
            a[i] -= flux;
            a[i + 1] += flux;
        }
        let phi = self.hartree_potential(u);
        let w = self.grid.weights();
        for i in 0..n {
            a[i] += w[i] * u[i] * phi[i] / (4.0 * PI);
        }
        a
    }

    fn b_dual(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.grid.weights())
            .map(|(v, w)| w * v.abs() * v)
            .collect()
    }

    fn check_pair(&self, u: &[f64], v: &[f64]) -> Result<()> {
        let n = self.grid.len();
        for x in [u, v] {
            if x.len() != n {
                return Err(NehariError::GridMismatch {
                    left: n,
                    right: x.len(),
                });
            }
        }
        Ok(())
    }

    /// `A_s(u)v = ∫∇u·∇v + (1/4π)∫∫ u²(x) u(y) v(y) / |x − y|`.
    pub fn apply_as(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_pair(u, v)?;
        Ok(crate::scaled::dot(&self.a_dual(u), v))
    }

    /// `B_s(u)v = ∫|u| u v`.
    pub fn apply_bs(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_pair(u, v)?;
        Ok(crate::scaled::dot(&self.b_dual(u), v))
    }

    pub fn apply_f(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_pair(u, v)?;
        Ok(crate::scaled::dot(
            &self.term_dual(self.nonlinearity.sub, u),
            v,
        ))
    }

    pub fn apply_g(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_pair(u, v)?;
        Ok(crate::scaled::dot(
            &self.term_dual(self.nonlinearity.sup, u),
            v,
        ))
    }

    /// Typed variant of [`Self::apply_as`] checking that both functions share this grid.
    pub fn apply_as_fn(&self, u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
        if *u.grid != *self.grid || *v.grid != *self.grid {
            return Err(NehariError::GridMismatch {
                left: u.grid.len(),
                right: v.grid.len(),
            });
        }
        self.apply_as(&u.values, &v.values)
    }

    /// `u_t(r) = t² u(t r)`.
    pub fn scale_function(&self, u: &[f64], t: f64) -> Vec<f64> {
        if t == 1.0 {
            return u.to_vec();
        }
        if t == 0.0 {
            return vec![0.0; u.len()];
        }
        let t2 = t * t;
        self.grid
            .resample_dilated(u, t)
            .into_iter()
            .map(|v| t2 * v)
            .collect()
    }

    /// `[∫|∇u|² + D(u)^{1/2}]^{1/2}`.
    pub fn norm_e(&self, u: &[f64]) -> f64 {
        (self.dirichlet_energy(u) + self.coulomb_energy(u).sqrt()).sqrt()
    }

    /// Euler and Pohozaev identities for
    /// `α[−Δu + (1/4π|x| ⋆ u²)u] = β|u|u + γ f(u) + δ g(u)`,
    /// where `f`, `g` are this model's signed power operators.
    pub fn pohozaev_check_sps(
        &self,
        u: &[f64],
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    ) -> SpsIdentityResiduals {
        let grad = self.dirichlet_energy(u);
        let coulomb = self.coulomb_energy(u);
        let cube = self.power_integral(u, 3.0);
        let (sub, sub_p) = self.signed_power(self.nonlinearity.sub, u);
        let (sup, sup_p) = self.signed_power(self.nonlinearity.sup, u);
        let euler_lhs = alpha * (grad + coulomb / (4.0 * PI));
        let euler_rhs = beta * cube + gamma * sub + delta * sup;
        let poho_lhs = alpha * (0.5 * grad + 5.0 * coulomb / (16.0 * PI));
        let poho_rhs = beta * cube + 3.0 * gamma * sub / sub_p + 3.0 * delta * sup / sup_p;
        SpsIdentityResiduals {
            euler_residual: euler_lhs - euler_rhs,
            pohozaev_residual: poho_lhs - poho_rhs,
        }
    }

    /// `(sign ∫|u|^p, p)`, zero integral for an absent term.
    fn signed_power(&self, term: Option<PowerTerm>, u: &[f64]) -> (f64, f64) {
        match term {
            None => (0.0, 1.0),
            Some(t) => (t.sign * self.power_integral(u, t.exponent), t.exponent),
        }
    }

    fn gram_diagonals(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.len();
        let mut diag: Vec<f64> = self.grid.weights().to_vec();
        for (i, k) in self.stiffness.iter().enumerate() {
            diag[i] += k;
            diag[i + 1] += k;
        }
        let off: Vec<f64> = self.stiffness.iter().map(|k| -k).collect();
        debug_assert_eq!(off.len(), n - 1);
        (diag, off)
    }
}

impl ScaledProblem for SpsProblem {
    fn describe(&self) -> String {
        let term = |t: Option<PowerTerm>| match t {
            None => "none".to_string(),
            Some(t) => format!("{}{}", if t.sign > 0.0 { "+" } else { "-" }, t.exponent),
        };
        format!(
            "sps n={} r=[{:e},{:e}] sigma={} tau={}",
            self.grid.len(),
            self.grid.r_min(),
            self.grid.r_max(),
            term(self.nonlinearity.sub),
            term(self.nonlinearity.sup)
        )
    }

    fn exponents(&self) -> ScalingExponents {
        self.nonlinearity.exponents()
    }

    fn sign_case(&self) -> Option<SignCase> {
        self.nonlinearity.sign_case()
    }

    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn functionals(&self, u: &[f64]) -> FunctionalValues {
        FunctionalValues {
            i_s: self.eval_i(u),
            j_s: self.eval_j(u),
            f: self.eval_f(u),
            g: self.eval_g(u),
        }
    }

    fn derivatives(&self, u: &[f64]) -> Derivatives {
        Derivatives {
            a: self.a_dual(u),
            b: self.b_dual(u),
            f: self.term_dual(self.nonlinearity.sub, u),
            g: self.term_dual(self.nonlinearity.sup, u),
        }
    }

    fn scale(&self, u: &[f64], t: f64) -> Vec<f64> {
        self.scale_function(u, t)
    }

    /// `∫∇u·∇v + ∫uv` on the grid.
    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let grad: f64 = self
            .stiffness
            .iter()
            .enumerate()
            .map(|(i, k)| k * (u[i + 1] - u[i]) * (v[i + 1] - v[i]))
            .sum();
        grad + self
            .grid
            .weights()
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum::<f64>()
    }

    fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        let (diag, off) = self.gram_diagonals();
        crate::linalg::solve_symmetric_tridiagonal(&diag, &off, dual)
    }

    fn probe_norms(&self) -> Vec<f64> {
        self.gram_diagonals().0.into_iter().map(f64::sqrt).collect()
    }

    /// One to three positive Gaussian bumps of random center and width.
    fn random_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                (
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.0..1.5),
                    rng.gen_range(0.4..1.5),
                )
            })
            .collect();
        self.grid
            .nodes()
            .iter()
            .map(|&r| {
                bumps
                    .iter()
                    .map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
                    .sum()
            })
            .collect()
    }
}
