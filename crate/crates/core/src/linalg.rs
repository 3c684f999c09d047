//! Small banded solvers.

/// Solves `T x = b` for a symmetric tridiagonal `T` with diagonal `diag` and
/// off-diagonal `off` (Thomas algorithm, no pivoting; `T` must be diagonally
/// dominant or positive definite).
pub fn solve_symmetric_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n, "off-diagonal length");
    assert_eq!(rhs.len(), n, "right-hand side length");
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    x[0] = rhs[0] / denom;
    for i in 1..n {
        c[i - 1] = off[i - 1] / denom;
        denom = diag[i] - off[i - 1] * c[i - 1];
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// `y = T x` for a symmetric tridiagonal `T`.
pub fn tridiagonal_apply(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut y: Vec<f64> = diag.iter().zip(x).map(|(d, v)| d * v).collect();
    for i in 0..n - 1 {
        y[i] += off[i] * x[i + 1];
        y[i + 1] += off[i] * x[i];
    }
    y
}
