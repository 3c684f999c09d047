use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use nehari_core::dirichlet::{DirichletParams, DirichletProblem, IntervalGrid};
use nehari_core::radial::RadialGrid;
use nehari_core::scaled::{fiber_residual, solve_fiber_values, ScalingExponents};
use nehari_core::sps::{SpsNonlinearity, SpsProblem};
use nehari_core::{ScaledProblem, SignCase, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sps(n: usize, case: SignCase) -> SpsProblem {
    let grid = Arc::new(RadialGrid::with_characteristic_length(n, 1.0).unwrap());
    SpsProblem::new(grid, SpsNonlinearity::for_case(case, 2.7, 4.0).unwrap())
}

fn dirichlet(n: usize, mu: f64, nu: f64) -> DirichletProblem {
    let params = DirichletParams {
        sigma: 1.5,
        tau: 4.0,
        mu,
        nu,
    };
    DirichletProblem::new(IntervalGrid::new(n).unwrap(), params).unwrap()
}

#[test]
fn coulomb_prefix_sums_match_the_direct_double_sum() {
    let p = sps(300, SignCase::I);
    let u = p.random_state(&mut ChaCha8Rng::seed_from_u64(11));
    let r = p.grid().nodes();
    let w = p.grid().weights();
    let charge: Vec<f64> = (0..u.len()).map(|i| w[i] * u[i] * u[i]).collect();
    let mut direct = 0.0;
    for i in 0..u.len() {
        for j in 0..u.len() {
            direct += charge[i] * charge[j] / r[i].max(r[j]);
        }
    }
    let fast = p.coulomb_energy(&u);
    assert!(
        (fast - direct).abs() <= 1e-12 * direct,
        "{fast} vs {direct}"
    );
}

/// Gaussian `e^{-r²}`: `∫|∇u|² = 3π^{3/2}/(2√2)`, `D(u) = π^{5/2}/4`.
#[test]
fn gaussian_energies_converge_at_second_order() {
    let grad_exact = 3.0 * PI.powf(1.5) / (2.0 * 2f64.sqrt());
    let coulomb_exact = PI.powf(2.5) / 4.0;
    let errors = |n: usize| {
        let p = sps(n, SignCase::I);
        let u: Vec<f64> = p.grid().nodes().iter().map(|r| (-r * r).exp()).collect();
        (
            (p.dirichlet_energy(&u) - grad_exact).abs() / grad_exact,
            (p.coulomb_energy(&u) - coulomb_exact).abs() / coulomb_exact,
        )
    };
    let (g256, c256) = errors(256);
    let (g512, c512) = errors(512);
    assert!(
        g512 < 2e-4 && c512 < 1e-4,
        "gradient {g512:e}, coulomb {c512:e}"
    );
    assert!(
        g256 / g512 > 3.5 && c256 / c512 > 3.5,
        "ratios {} {}",
        g256 / g512,
        c256 / c512
    );
}

#[test]
fn dirichlet_lambda_one_matches_a_dense_generalized_eigensolve() {
    let n = 127;
    let h = 1.0 / (n + 1) as f64;
    let k = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / h,
        1 => -1.0 / h,
        _ => 0.0,
    });
    let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 10.0 * h / 12.0,
        1 => h / 12.0,
        _ => 0.0,
    });
    let l = m.cholesky().unwrap().l();
    let l_inv = l.clone().try_inverse().unwrap();
    let reduced = &l_inv * k * l_inv.transpose();
    let dense = reduced.symmetric_eigen().eigenvalues.min();
    let p = dirichlet(n, 0.0, 0.0);
    let lambda = p.rayleigh_lambda1().unwrap();
    assert!(
        (lambda - dense).abs() <= 1e-11 * dense,
        "{lambda} vs {dense}"
    );
}

fn richardson(f: impl Fn(f64) -> f64, eps: f64) -> f64 {
    let central = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * central(0.5 * eps) - central(eps)) / 3.0
}

fn check_derivatives(p: &dyn ScaledProblem, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..5 {
        let u = p.random_state(&mut rng);
        // A pointwise multiple of u keeps u + h d away from the zero set,
        // where |u|^1.5 is not twice differentiable.
        let m = p.random_state(&mut rng);
        let peak = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let dir: Vec<f64> = u
            .iter()
            .zip(&m)
            .map(|(a, b)| a * (0.5 + b / peak))
            .collect();
        let d = p.derivatives(&u);
        let along = |h: f64| -> Vec<f64> { u.iter().zip(&dir).map(|(a, b)| a + h * b).collect() };
        let pair = |dual: &[f64]| -> f64 { dual.iter().zip(&dir).map(|(a, b)| a * b).sum() };
        let checks = [
            (
                pair(&d.a),
                richardson(|h| p.functionals(&along(h)).i_s, 1e-4),
            ),
            (
                pair(&d.b),
                richardson(|h| p.functionals(&along(h)).j_s, 1e-4),
            ),
            (pair(&d.f), richardson(|h| p.functionals(&along(h)).f, 1e-4)),
            (pair(&d.g), richardson(|h| p.functionals(&along(h)).g, 1e-4)),
        ];
        for (k, (analytic, fd)) in checks.into_iter().enumerate() {
            let scale = analytic.abs().max(fd.abs()).max(1e-300);
            assert!(
                (analytic - fd).abs() <= 1e-6 * scale,
                "{} term {k}: {analytic} vs {fd}",
                p.describe()
            );
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    check_derivatives(&sps(256, SignCase::V), 21);
    check_derivatives(&sps(256, SignCase::VI), 22);
    check_derivatives(&dirichlet(127, 1.0, -1.0), 23);
}

fn exps() -> ScalingExponents {
    // sps with sigma = 2.7, tau = 4.
    ScalingExponents::new(3.0, 2.4, 5.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dirichlet_scaling_laws_are_exact(seed in 0u64..1_000, t in 0.05f64..20.0) {
        let p = dirichlet(127, 1.0, -1.0);
        let u = p.random_state(&mut ChaCha8Rng::seed_from_u64(seed));
        let e = p.exponents();
        let (a, b) = (p.functionals(&u), p.functionals(&p.scale(&u, t)));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
        prop_assert!(close(b.i_s, t.powf(e.s) * a.i_s));
        prop_assert!(close(b.j_s, t.powf(e.s) * a.j_s));
        prop_assert!(close(b.f, t.powf(e.q) * a.f));
        prop_assert!(close(b.g, t.powf(e.r) * a.g));
    }

    #[test]
    fn fiber_roots_solve_the_fiber_equation(
        case_index in 0usize..6,
        f_mag in -6.0f64..6.0,
        g_mag in -6.0f64..6.0,
        c_mag in -6.0f64..6.0,
    ) {
        let case = SignCase::ALL[case_index];
        let (sf, sg) = case.signs();
        let sign = |s: nehari_core::scaled::Sign| match s {
            nehari_core::scaled::Sign::Positive => 1.0,
            nehari_core::scaled::Sign::Negative => -1.0,
            nehari_core::scaled::Sign::Zero => 0.0,
        };
        let f = sign(sf) * 10f64.powf(f_mag);
        let g = sign(sg) * 10f64.powf(g_mag);
        let c = case.interval().sign() * 10f64.powf(c_mag);
        let e = exps();
        let sol = solve_fiber_values(e, case, f, g, c, &Tolerances::default()).unwrap();
        prop_assert!(sol.t > 0.0);
        prop_assert!(fiber_residual(e, f, g, c, sol.t).abs() <= 1e-12 * (1.0 + c.abs() * e.s));
    }
}
