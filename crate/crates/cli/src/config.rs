//! Run configuration: TOML file, embedded defaults, environment and flag overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nehari_core::dirichlet::{DirichletParams, DirichletProblem, IntervalGrid};
use nehari_core::optimizer::{SolverConfig, VerifyTolerances};
use nehari_core::radial::RadialGrid;
use nehari_core::sps::{PowerTerm, SpsNonlinearity, SpsProblem};
use nehari_core::ScaledProblem;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "NEHARI_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "sps")]
    Sps,
    #[serde(rename = "dirichlet-1d")]
    Dirichlet1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsSection {
    pub n: usize,
    pub r_char: f64,
    /// Subscaled exponent; omit to drop the term.
    pub sigma: Option<f64>,
    pub sigma_sign: f64,
    /// Superscaled exponent; omit to drop the term.
    pub tau: Option<f64>,
    pub tau_sign: f64,
}

impl Default for SpsSection {
    fn default() -> Self {
        Self {
            n: 512,
            r_char: 1.0,
            sigma: Some(2.7),
            sigma_sign: 1.0,
            tau: None,
            tau_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletSection {
    pub n: usize,
    pub sigma: f64,
    pub tau: f64,
    pub mu: f64,
    pub nu: f64,
    pub tau_cap: f64,
}

impl Default for DirichletSection {
    fn default() -> Self {
        Self {
            n: 511,
            sigma: 1.5,
            tau: 4.0,
            mu: 0.0,
            nu: 0.0,
            tau_cap: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub c_min: f64,
    pub c_max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            c_min: -1e4,
            c_max: -1e-2,
            count: 24,
            spacing: Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub lambda_target: Option<f64>,
    pub tol_lambda: f64,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            lambda_target: None,
            tol_lambda: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub state: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub tolerances: VerifyTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses one per core.
    pub threads: usize,
    pub sps: SpsSection,
    pub dirichlet: DirichletSection,
    pub solver: SolverConfig,
    pub sweep: SweepSection,
    pub solve: SolveSection,
    pub verify: VerifySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Sps,
            output_dir: PathBuf::from("out"),
            threads: 0,
            sps: SpsSection::default(),
            dirichlet: DirichletSection::default(),
            solver: SolverConfig::default(),
            sweep: SweepSection::default(),
            solve: SolveSection::default(),
            verify: VerifySection::default(),
        }
    }
}

/// A configured discretized problem.
pub enum Model {
    Sps(SpsProblem),
    Dirichlet(DirichletProblem),
}

impl Model {
    pub fn problem(&self) -> &dyn ScaledProblem {
        match self {
            Model::Sps(p) => p,
            Model::Dirichlet(p) => p,
        }
    }

    /// Node coordinates and the CSV name of the coordinate column.
    pub fn coordinates(&self) -> (&'static str, Vec<f64>) {
        match self {
            Model::Sps(p) => ("r", p.grid().nodes().to_vec()),
            Model::Dirichlet(p) => ("x", p.grid().nodes()),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("malformed config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Applies `NEHARI_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.solver.rng_seed = raw.trim().parse().map_err(|_| {
                CliError::config(format!(
                    "{SEED_ENV} must be an unsigned integer, got '{raw}'"
                ))
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver.validate().map_err(CliError::from_core)?;
        let s = &self.sweep;
        if s.c_min < 0.0 && s.c_max > 0.0 {
            return Err(CliError::config(format!(
                "sweep [{}, {}] crosses c = 0",
                s.c_min, s.c_max
            )));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        match self.problem {
            ProblemKind::Sps => {
                let s = &self.sps;
                let term = |exponent: Option<f64>, sign: f64| {
                    exponent.map(|exponent| PowerTerm { exponent, sign })
                };
                let nonlinearity =
                    SpsNonlinearity::new(term(s.sigma, s.sigma_sign), term(s.tau, s.tau_sign))
                        .map_err(CliError::from_core)?;
                let grid = RadialGrid::with_characteristic_length(s.n, s.r_char)
                    .map_err(CliError::from_core)?;
                Ok(Model::Sps(SpsProblem::new(Arc::new(grid), nonlinearity)))
            }
            ProblemKind::Dirichlet1d => {
                let d = &self.dirichlet;
                let grid = IntervalGrid::new(d.n).map_err(CliError::from_core)?;
                let params = DirichletParams {
                    sigma: d.sigma,
                    tau: d.tau,
                    mu: d.mu,
                    nu: d.nu,
                };
                let problem = DirichletProblem::with_tau_cap(grid, params, d.tau_cap)
                    .map_err(CliError::from_core)?;
                Ok(Model::Dirichlet(problem))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg = RunConfig::parse("problem = \"dirichlet-1d\"\n[dirichlet]\nn = 127\n").unwrap();
        assert_eq!(cfg.problem, ProblemKind::Dirichlet1d);
        assert_eq!(cfg.dirichlet.n, 127);
        assert_eq!(cfg.sweep, SweepSection::default());
    }

    #[test]
    fn unknown_keys_and_bad_windows_are_rejected() {
        assert!(RunConfig::parse("problme = \"sps\"").is_err());
        let cfg = RunConfig::parse("[sps]\nsigma = 4.0\n").unwrap();
        let err = cfg.build_model().err().unwrap();
        assert!(err.message.contains("(18/7, 3)"), "{}", err.message);
        assert_eq!(err.code, 1);
    }

    #[test]
    fn sweeps_crossing_zero_are_rejected() {
        let cfg = RunConfig::parse("[sweep]\nc_min = -1.0\nc_max = 2.0\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
