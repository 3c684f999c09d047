//! Scaled Nehari-manifold solvers for nonlinear eigenvalue problems with
//! prescribed energy.
//!
//! The [`scaled`] module holds the abstract framework; [`sps`] and
//! [`dirichlet`] are its two instantiations; [`optimizer`] and [`curve`]
//! compute first eigenvalues, energy curves and prescribed-λ solutions.

// `!(x > y)` is used on purpose so that NaN fails every positivity test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curve;
pub mod dirichlet;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod radial;
pub mod scaled;
pub mod sps;

pub use error::{NehariError, Result};
pub use scaled::{ScaledProblem, SignCase, Tolerances};
