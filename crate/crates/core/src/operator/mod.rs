//! Finite-difference half-line Laplacians, Kronecker sums with the fiber
//! operator `L`, and dense symmetric functional calculus.

mod branch;
mod eigen;
mod laplacian;
mod tensor;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use branch::sqrt_cut;
pub use eigen::{eigh, symmetry_defect, EigenDecomposition, SYMMETRY_TOL};
pub use laplacian::{laplacian_half_line, Boundary, HalfLineLaplacian};
pub use tensor::{fiber_sum, kron_sum, FiberOperator, TensorSumOperator};

use crate::error::Result;

/// `Q f(Λ) Qᵀ`.
pub fn apply_fn(e: &EigenDecomposition, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    e.apply_fn(f)
}

/// `1_{(-∞, α)}(A)`.
pub fn spectral_projection(e: &EigenDecomposition, alpha: f64) -> DMatrix<f64> {
    e.spectral_projection(alpha)
}

/// `(A - z)^{-1}` for a symmetric `A`.
pub fn resolvent(a: &DMatrix<f64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    eigh(a)?.resolvent(z)
}
