use std::f64::consts::FRAC_2_PI;

use nalgebra::DMatrix;

use super::spectral::sinc;
use crate::error::{Error, Result};
use crate::grid::{discretize_kernel, Convention, Grid, NystromMatrix};
use crate::operator::FiberOperator;

/// Symmetrized Nyström matrix of `(Kψ)(t) = (2/π)∫ sin(t+τ)/(t+τ) ψ(τ) dτ`.
pub fn hankel_k(grid: &Grid) -> NystromMatrix<f64> {
    discretize_kernel(
        |t, s| DMatrix::from_element(1, 1, FRAC_2_PI * sinc(t + s)),
        1,
        grid,
        Convention::Symmetrized,
    )
    .expect("sinc kernel is finite")
}

/// `Ψ₀(t) = e^{-t}`.
pub fn psi0(t: f64) -> f64 {
    (-t).exp()
}

/// Symmetrized Nyström matrix of the rank-one operator `ψ ↦ ⟨ψ, Ψ₀⟩Ψ₀`,
/// the resolvent difference of the scalar half-line Laplacians at `-1`.
pub fn rank_one_b(grid: &Grid) -> NystromMatrix<f64> {
    let v = nalgebra::DVector::from_iterator(
        grid.len(),
        grid.nodes().iter().zip(grid.weights()).map(|(&t, &w)| w.sqrt() * psi0(t)),
    );
    let data = &v * v.transpose();
    NystromMatrix::new(data, Convention::Symmetrized, grid.clone(), 1).expect("shape matches grid")
}

/// `B_{Ψ₀} ⊗ (L − z)^{-1}` for real `z < min σ(L)`, symmetrized.
pub fn separated_variables_operator(l: &FiberOperator, z: f64, grid: &Grid) -> Result<NystromMatrix<f64>> {
    if !(z < l.min_eigenvalue()) {
        return Err(Error::invalid(format!(
            "z = {z} must lie below min σ(L) = {}",
            l.min_eigenvalue()
        )));
    }
    let inv = l.eig().resolvent_real(z)?;
    let b = rank_one_b(grid);
    NystromMatrix::new(b.data().kronecker(&inv), Convention::Symmetrized, grid.clone(), l.dim())
}

/// Discrete form of the dilation `(U_c ψ)(t) = c^{1/2} ψ(ct)`.
///
/// Returns the grid with nodes `c·t_i` and weights `c·w_i`. For a Hankel
/// kernel `g(t+τ)`, the symmetrized Nyström matrix of `c·g(c(t+τ))` on
/// `grid` coincides entry for entry with the symmetrized Nyström matrix of
/// `g(t+τ)` on the returned grid. The `sin` kernel of the projection
/// difference, `sin(c(t+τ))/(t+τ) = c·sinc(c(t+τ))`, has exactly this form.
pub fn scaled_grid_similarity(grid: &Grid, c: f64) -> Result<Grid> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
    }
    Grid::from_parts(
        grid.nodes().iter().map(|t| c * t).collect(),
        grid.weights().iter().map(|w| c * w).collect(),
        c * grid.spacing(),
        c * grid.t_max(),
    )
}
