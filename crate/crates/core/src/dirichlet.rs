//! One-dimensional Dirichlet problem
//! `−u″ = λu + μ|u|^{σ−2}u + ν|u|^{τ−2}u` on `(0, 1)` with the standard
//! scaling `u_t = t u` (`s = 2`, `q = σ`, `r = τ`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};
use crate::linalg::{solve_symmetric_tridiagonal, tridiagonal_apply};
use crate::scaled::{
    dot, pohozaev_from_values, Derivatives, FunctionalValues, ScaledProblem, ScalingExponents,
    Sign, SignCase,
};

pub const MIN_INTERIOR_NODES: usize = 63;
pub const DEFAULT_TAU_CAP: f64 = 6.0;

/// `n` interior nodes `x_i = i h`, `h = 1/(n+1)`; `u(0) = u(1) = 0` implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalGrid {
    n: usize,
}

impl IntervalGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_INTERIOR_NODES {
            return Err(NehariError::InvalidConfig(format!(
                "interval grid needs at least {MIN_INTERIOR_NODES} interior nodes, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.n).map(|i| i as f64 * h).collect()
    }
}

/// Parameters of the 1-D model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    pub sigma: f64,
    pub tau: f64,
    pub mu: f64,
    pub nu: f64,
}

impl DirichletParams {
    pub fn validate(&self, tau_cap: f64) -> Result<()> {
        if !(self.sigma > 1.0 && self.sigma < 2.0) {
            return Err(NehariError::InvalidConfig(format!(
                "sigma = {} is outside the window (1, 2)",
                self.sigma
            )));
        }
        if !(self.tau > 2.0 && self.tau <= tau_cap) {
            return Err(NehariError::InvalidConfig(format!(
                "tau = {} is outside the window (2, {tau_cap}]",
                self.tau
            )));
        }
        if !(self.mu.is_finite() && self.nu.is_finite()) || self.mu * self.nu > 0.0 {
            return Err(NehariError::InvalidConfig(format!(
                "mu = {} and nu = {} must be finite with mu * nu <= 0",
                self.mu, self.nu
            )));
        }
        Ok(())
    }

    pub fn sign_case(&self) -> Option<SignCase> {
        let sign = |x: f64| {
            if x > 0.0 {
                Sign::Positive
            } else if x < 0.0 {
                Sign::Negative
            } else {
                Sign::Zero
            }
        };
        SignCase::from_signs(sign(self.mu), sign(self.nu))
    }
}

/// Discretization: `I = ½ Σ (u_{i+1} − u_i)² / h`, `J = ½ uᵀ M u` with the
/// fourth-order (Numerov) mass matrix `M = h·tridiag(1/12, 10/12, 1/12)`,
/// `F = (μ/σ) h Σ |u_i|^σ`, `G = (ν/τ) h Σ |u_i|^τ`.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    grid: IntervalGrid,
    params: DirichletParams,
    stiff_diag: Vec<f64>,
    stiff_off: Vec<f64>,
    mass_diag: Vec<f64>,
    mass_off: Vec<f64>,
}

impl DirichletProblem {
    pub fn new(grid: IntervalGrid, params: DirichletParams) -> Result<Self> {
        Self::with_tau_cap(grid, params, DEFAULT_TAU_CAP)
    }

    pub fn with_tau_cap(grid: IntervalGrid, params: DirichletParams, tau_cap: f64) -> Result<Self> {
        params.validate(tau_cap)?;
        let n = grid.len();
        let h = grid.step();
        Ok(Self {
            grid,
            params,
            stiff_diag: vec![2.0 / h; n],
            stiff_off: vec![-1.0 / h; n - 1],
            mass_diag: vec![10.0 * h / 12.0; n],
            mass_off: vec![h / 12.0; n - 1],
        })
    }

    /// The pure eigenvalue problem `μ = ν = 0`.
    pub fn linear(grid: IntervalGrid) -> Self {
        Self::new(
            grid,
            DirichletParams {
                sigma: 1.5,
                tau: 4.0,
                mu: 0.0,
                nu: 0.0,
            },
        )
        .expect("default exponents are valid")
    }

    pub fn grid(&self) -> &IntervalGrid {
        &self.grid
    }

    pub fn params(&self) -> &DirichletParams {
        &self.params
    }

    pub fn eval_i_1d(&self, u: &[f64]) -> f64 {
        0.5 * dot(&tridiagonal_apply(&self.stiff_diag, &self.stiff_off, u), u)
    }

    pub fn eval_j_1d(&self, u: &[f64]) -> f64 {
        0.5 * dot(&tridiagonal_apply(&self.mass_diag, &self.mass_off, u), u)
    }

    pub fn eval_f_1d(&self, u: &[f64]) -> f64 {
        self.power_term(self.params.mu, self.params.sigma, u)
    }

    pub fn eval_g_1d(&self, u: &[f64]) -> f64 {
        self.power_term(self.params.nu, self.params.tau, u)
    }

    fn power_term(&self, coef: f64, p: f64, u: &[f64]) -> f64 {
        if coef == 0.0 {
            return 0.0;
        }
        coef / p * self.grid.step() * u.iter().map(|v| v.abs().powf(p)).sum::<f64>()
    }

    fn power_dual(&self, coef: f64, p: f64, u: &[f64]) -> Vec<f64> {
        if coef == 0.0 {
            return vec![0.0; u.len()];
        }
        let h = self.grid.step();
        u.iter()
            .map(|v| coef * h * v.abs().powf(p - 2.0) * v)
            .collect()
    }

    /// Smallest eigenvalue of `K u = λ M u`, i.e. the minimum of `Ψ̃ = I/J`.
    pub fn rayleigh_lambda1(&self) -> Result<f64> {
        Ok(self.first_eigenpair()?.0)
    }

    /// `(λ₁, φ₁)` with `φ₁ > 0` and `I(φ₁) = 1`, by inverse iteration.
    pub fn first_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let mut u: Vec<f64> = self.grid.nodes().iter().map(|x| x * (1.0 - x)).collect();
        let mut lambda = f64::INFINITY;
        for iteration in 0..200 {
            let mu = tridiagonal_apply(&self.mass_diag, &self.mass_off, &u);
            let mut next = solve_symmetric_tridiagonal(&self.stiff_diag, &self.stiff_off, &mu);
            let scale = self.eval_i_1d(&next).sqrt();
            next.iter_mut().for_each(|v| *v /= scale);
            let estimate = self.eval_i_1d(&next) / self.eval_j_1d(&next);
            let change = (estimate - lambda).abs();
            u = next;
            lambda = estimate;
            if change <= 1e-15 * lambda && iteration > 2 {
                return Ok((lambda, u));
            }
        }
        Err(NehariError::NoConvergence {
            what: "inverse iteration",
            iterations: 200,
            residual: lambda,
        })
    }

    /// `2αI − 2βJ − σγF − τδG`.
    pub fn pohozaev_check_1d(
        &self,
        u: &[f64],
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    ) -> f64 {
        pohozaev_from_values(
            self.exponents(),
            &self.functionals(u),
            alpha,
            beta,
            gamma,
            delta,
        )
    }
}

impl ScaledProblem for DirichletProblem {
    fn describe(&self) -> String {
        let DirichletParams { sigma, tau, mu, nu } = self.params;
        format!(
            "dirichlet-1d n={} sigma={sigma} tau={tau} mu={mu} nu={nu}",
            self.grid.len()
        )
    }

    fn exponents(&self) -> ScalingExponents {
        ScalingExponents {
            s: 2.0,
            q: self.params.sigma,
            r: self.params.tau,
        }
    }

    fn sign_case(&self) -> Option<SignCase> {
        self.params.sign_case()
    }

    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn functionals(&self, u: &[f64]) -> FunctionalValues {
        FunctionalValues {
            i_s: self.eval_i_1d(u),
            j_s: self.eval_j_1d(u),
            f: self.eval_f_1d(u),
            g: self.eval_g_1d(u),
        }
    }

    fn derivatives(&self, u: &[f64]) -> Derivatives {
        Derivatives {
            a: tridiagonal_apply(&self.stiff_diag, &self.stiff_off, u),
            b: tridiagonal_apply(&self.mass_diag, &self.mass_off, u),
            f: self.power_dual(self.params.mu, self.params.sigma, u),
            g: self.power_dual(self.params.nu, self.params.tau, u),
        }
    }

    fn scale(&self, u: &[f64], t: f64) -> Vec<f64> {
        u.iter().map(|v| t * v).collect()
    }

    /// `∫u′v′`.
    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(&tridiagonal_apply(&self.stiff_diag, &self.stiff_off, u), v)
    }

    fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        solve_symmetric_tridiagonal(&self.stiff_diag, &self.stiff_off, dual)
    }

    fn probe_norms(&self) -> Vec<f64> {
        self.stiff_diag.iter().map(|d| d.sqrt()).collect()
    }

    /// `sin(πx)` times one to three positive Gaussian bumps.
    fn random_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                (
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.1..0.9),
                    rng.gen_range(0.1..0.5),
                )
            })
            .collect();
        self.grid
            .nodes()
            .iter()
            .map(|&x| {
                (std::f64::consts::PI * x).sin()
                    * bumps
                        .iter()
                        .map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp())
                        .sum::<f64>()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(grid: &IntervalGrid) -> Vec<f64> {
        grid.nodes().iter().map(|x| (PI * x).sin()).collect()
    }

    #[test]
    fn validation_windows() {
        let g = IntervalGrid::new(63).unwrap();
        assert!(IntervalGrid::new(62).is_err());
        let ok = DirichletParams {
            sigma: 1.5,
            tau: 4.0,
            mu: 1.0,
            nu: -1.0,
        };
        assert!(DirichletProblem::new(g, ok).is_ok());
        let err = DirichletProblem::new(
            g,
            DirichletParams {
                mu: 1.0,
                nu: 1.0,
                ..ok
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("mu * nu <= 0"));
        assert!(DirichletProblem::new(g, DirichletParams { sigma: 2.0, ..ok }).is_err());
        assert!(DirichletProblem::new(g, DirichletParams { tau: 6.5, ..ok }).is_err());
        assert!(DirichletProblem::with_tau_cap(g, DirichletParams { tau: 6.5, ..ok }, 8.0).is_ok());
    }

    #[test]
    fn sign_cases_follow_coefficients() {
        let base = DirichletParams {
            sigma: 1.5,
            tau: 4.0,
            mu: 0.0,
            nu: 0.0,
        };
        assert_eq!(base.sign_case(), None);
        assert_eq!(
            DirichletParams { mu: 2.0, ..base }.sign_case(),
            Some(SignCase::I)
        );
        assert_eq!(
            DirichletParams { mu: -2.0, ..base }.sign_case(),
            Some(SignCase::II)
        );
        assert_eq!(
            DirichletParams { nu: 1.0, ..base }.sign_case(),
            Some(SignCase::III)
        );
        assert_eq!(
            DirichletParams { nu: -1.0, ..base }.sign_case(),
            Some(SignCase::IV)
        );
        assert_eq!(
            DirichletParams {
                mu: 1.0,
                nu: -1.0,
                ..base
            }
            .sign_case(),
            Some(SignCase::V)
        );
        assert_eq!(
            DirichletParams {
                mu: -1.0,
                nu: 1.0,
                ..base
            }
            .sign_case(),
            Some(SignCase::VI)
        );
    }

    #[test]
    fn sine_functionals() {
        let g = IntervalGrid::new(511).unwrap();
        let p = DirichletProblem::linear(g);
        let u = sine(&g);
        let i = p.eval_i_1d(&u);
        let j = p.eval_j_1d(&u);
        assert!((i - PI * PI / 4.0).abs() < 1e-4 * PI * PI / 4.0, "I = {i}");
        assert!((j - 0.25).abs() < 1e-4 * 0.25, "J = {j}");
        let z = vec![0.0; 511];
        assert_eq!(p.functionals(&z), FunctionalValues::default());
    }

    #[test]
    fn quotient_makes_pohozaev_vanish() {
        let g = IntervalGrid::new(127).unwrap();
        let p = DirichletProblem::linear(g);
        let u: Vec<f64> = g.nodes().iter().map(|x| x * x * (1.0 - x)).collect();
        let beta = p.eval_i_1d(&u) / p.eval_j_1d(&u);
        assert!(p.pohozaev_check_1d(&u, 1.0, beta, 0.0, 0.0).abs() < 1e-14);
        assert_eq!(
            p.pohozaev_check_1d(&vec![0.0; 127], 1.0, 2.0, 3.0, 4.0),
            0.0
        );
    }

    #[test]
    fn inverse_iteration_finds_pi_squared() {
        let g = IntervalGrid::new(511).unwrap();
        let p = DirichletProblem::linear(g);
        let (lambda, phi) = p.first_eigenpair().unwrap();
        assert!((lambda - PI * PI).abs() < 1e-8 * PI * PI, "λ₁ = {lambda}");
        assert!(phi.iter().all(|v| *v > 0.0));
        assert!(
            p.pohozaev_check_1d(&phi, 1.0, PI * PI, 0.0, 0.0).abs() <= 1e-8 * p.eval_i_1d(&phi)
        );
    }
}
