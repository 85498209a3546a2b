//! Numerical laboratory for the Neumann and Dirichlet realisations of
//! `H = (-d²/dt²) ⊗ id + id ⊗ L` on the half-line.
//!
//! The crate has two independent worlds that are checked against each other:
//!
//! * [`operator`]: finite-difference Laplacians, Kronecker sums with a finite
//!   nonnegative fiber operator `L`, and dense functional calculus
//!   (resolvents, spectral projections).
//! * [`kernels`]: closed-form integral kernels for the resolvent difference,
//!   the spectral-projection difference, the solution operator, the
//!   Dirichlet-to-Neumann map and the Hankel operator with the `sin` kernel,
//!   discretised by Nyström quadrature on a [`grid::Grid`].
//!
//! [`verification`] runs the cross-checks and produces [`verification::CheckReport`]s;
//! [`cli`] is the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod operator;
pub mod verification;

pub use error::{Error, Result};
pub use grid::{Convention, Grid, NystromMatrix};
pub use num_complex::Complex64;
pub use operator::{Boundary, EigenDecomposition, FiberOperator, TensorSumOperator};
