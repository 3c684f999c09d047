//! Log-spaced radial grid for radial functions on R³.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};

pub const MIN_NODES: usize = 64;

/// Number of nodes in the interpolation stencil of [`RadialGrid::resample_dilated`].
pub const STENCIL: usize = 8;

/// Nodes `r_i = r_min · e^{i h}` with uniform spacing `h` in `x = ln r`.
///
/// Volume quadrature `∫ φ dx ≈ Σ w_i φ(r_i)` is the trapezoidal rule in `x`
/// (`dx = 4π r³ d(ln r)`), plus the exact volume `4π r_min³ / 3` of the inner
/// ball lumped onto the first node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r: Vec<f64>,
    log_step: f64,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(NehariError::InvalidConfig(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(NehariError::InvalidConfig(format!(
                "radial grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        let log_step = (r_max / r_min).ln() / (n - 1) as f64;
        let r: Vec<f64> = (0..n)
            .map(|i| r_min * (i as f64 * log_step).exp())
            .collect();
        let mut weights: Vec<f64> = r
            .iter()
            .map(|ri| 4.0 * PI * log_step * ri.powi(3))
            .collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        weights[0] += 4.0 * PI * r_min.powi(3) / 3.0;
        Ok(Self {
            r,
            log_step,
            weights,
        })
    }

    /// Grid on `[1e-3, 60] · r_char`.
    pub fn with_characteristic_length(n: usize, r_char: f64) -> Result<Self> {
        if !(r_char > 0.0 && r_char.is_finite()) {
            return Err(NehariError::InvalidConfig(format!(
                "characteristic length must be positive, got {r_char}"
            )));
        }
        Self::new(n, 1e-3 * r_char, 60.0 * r_char)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    /// Weights for `∫_{R³} φ(|x|) dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Resamples `u(t·r)` at the nodes by local Lagrange interpolation in `ln r`.
    ///
    /// Dilation is a shift by `ln t / h` in the node index, so an
    /// [`STENCIL`]-point centered stencil is used at every node. Beyond
    /// `r_max` the function is extended by zero; below `r_min` it is extended
    /// by the even expansion `u ≈ a + b r²` through the first two nodes.
    /// `t = 1` (and any shift by a whole number of nodes) copies values exactly.
    pub fn resample_dilated(&self, u: &[f64], t: f64) -> Vec<f64> {
        let n = u.len() as isize;
        let shift = t.ln() / self.log_step;
        let curvature = (u[1] - u[0]) / (self.r[1].powi(2) - self.r[0].powi(2));
        let at = |k: isize| -> f64 {
            if k < 0 {
                let rk = self.r[0] * (k as f64 * self.log_step).exp();
                u[0] + curvature * (rk * rk - self.r[0] * self.r[0])
            } else if k >= n {
                0.0
            } else {
                u[k as usize]
            }
        };
        let half = (STENCIL / 2) as isize;
        (0..n)
            .map(|i| {
                let pos = i as f64 + shift;
                let base = pos.floor();
                let frac = pos - base;
                let base = base as isize;
                if frac == 0.0 {
                    return at(base);
                }
                if base >= n - 1 {
                    return 0.0;
                }
                let lo = base - half + 1;
                let hi = base + half;
                let mut sum = 0.0;
                for j in lo..=hi {
                    let mut weight = 1.0;
                    for m in lo..=hi {
                        if m != j {
                            weight *= (frac - (m - base) as f64) / (j - m) as f64;
                        }
                    }
                    sum += weight * at(j);
                }
                sum
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(RadialGrid::new(32, 1e-3, 60.0).is_err());
        assert!(RadialGrid::new(128, 1.0, 0.5).is_err());
        assert!(RadialGrid::new(128, 0.0, 5.0).is_err());
    }

    #[test]
    fn nodes_are_log_spaced() {
        let g = RadialGrid::with_characteristic_length(128, 1.0).unwrap();
        assert!((g.r_min() - 1e-3).abs() < 1e-15);
        assert!((g.r_max() - 60.0).abs() < 1e-10);
        for w in g.nodes().windows(2) {
            assert!(((w[1] / w[0]).ln() - g.log_step()).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_volume_integral() {
        // ∫ e^{-r²} dx = π^{3/2}
        let g = RadialGrid::with_characteristic_length(256, 1.0).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let exact = PI.powf(1.5);
        assert!((g.integrate(&vals) - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn identity_and_whole_node_shifts_copy() {
        let g = RadialGrid::with_characteristic_length(128, 1.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        assert_eq!(g.resample_dilated(&u, 1.0), u);
        let two = g.resample_dilated(&u, (2.0 * g.log_step()).exp());
        assert_eq!(&two[..126], &u[2..]);
        assert_eq!(&two[126..], &[0.0, 0.0]);
    }

    #[test]
    fn polynomials_in_the_index_are_reproduced() {
        let g = RadialGrid::with_characteristic_length(128, 1.0).unwrap();
        let poly = |x: f64| 1.0 + 0.3 * x - 0.01 * x * x + 1e-5 * x.powi(7) / 128f64.powi(4);
        let data: Vec<f64> = (0..128).map(|i| poly(i as f64)).collect();
        let shifted = g.resample_dilated(&data, (0.3 * g.log_step()).exp());
        for i in 4..120 {
            let exact = poly(i as f64 + 0.3);
            assert!((shifted[i] - exact).abs() < 1e-10 * exact.abs(), "node {i}");
        }
    }

    #[test]
    fn gaussian_dilation_is_accurate() {
        let g = RadialGrid::with_characteristic_length(512, 1.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        for t in [0.25, 0.7, 1.9, 4.0] {
            let v = g.resample_dilated(&u, t);
            for (r, got) in g.nodes().iter().zip(&v) {
                assert!(
                    (got - (-(t * r).powi(2)).exp()).abs() < 1e-8,
                    "t = {t}, r = {r}"
                );
            }
        }
    }
}
