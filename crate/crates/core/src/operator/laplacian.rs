use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Boundary condition at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

/// Finite-difference `-d²/dt²` on the grid nodes `t_1 < … < t_N`.
///
/// The operator is stored as a pair (stencil, lumped mass). The stencil is
/// the symmetric 3-point matrix `(−1, 2, −1)/h²` with a Dirichlet closure at
/// `t_max`; at `t = 0` Dirichlet keeps the diagonal `2/h²` (the value at the
/// missing node `t_0 = 0` is zero) and Neumann uses the mirror closure with
/// diagonal `1/h²`.
///
/// On its own the mirror closure places the Neumann boundary at `h/2`, which
/// is only first order accurate. The Neumann mass gives the first node the
/// weight `3h/2` instead of `h`; the discrete operator `M⁻¹ S` is then the
/// one-sided second order Neumann scheme `(2u_1 − 2u_2)/(3h²)` in its first
/// row, and it is self-adjoint for the mass inner product. The Dirichlet mass
/// is `h` everywhere, so the Dirichlet operator is just the stencil.
#[derive(Debug, Clone)]
pub struct HalfLineLaplacian {
    boundary: Boundary,
    spacing: f64,
    stencil: DMatrix<f64>,
    mass: DVector<f64>,
}

/// Builds the Neumann or Dirichlet half-line Laplacian on `grid`.
pub fn laplacian_half_line(grid: &Grid, boundary: Boundary) -> Result<HalfLineLaplacian> {
    let n = grid.len();
    if n < 2 {
        return Err(Error::invalid(format!("Laplacian needs at least 2 nodes, got {n}")));
    }
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut stencil = DMatrix::zeros(n, n);
    for i in 0..n {
        stencil[(i, i)] = 2.0 * inv_h2;
        if i + 1 < n {
            stencil[(i, i + 1)] = -inv_h2;
            stencil[(i + 1, i)] = -inv_h2;
        }
    }
    let mut mass = DVector::from_element(n, h);
    if boundary == Boundary::Neumann {
        stencil[(0, 0)] = inv_h2;
        mass[0] = 1.5 * h;
    }
    Ok(HalfLineLaplacian {
        boundary,
        spacing: h,
        stencil,
        mass,
    })
}

impl HalfLineLaplacian {
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// The 3-point stencil matrix (symmetric, positive semidefinite).
    pub fn stencil(&self) -> &DMatrix<f64> {
        &self.stencil
    }

    /// Lumped mass `m_i` per node.
    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    /// `(M/h)^{-1/2} S (M/h)^{-1/2}`: the operator in a symmetric basis.
    ///
    /// For Dirichlet this is the stencil itself.
    pub fn symmetric(&self) -> DMatrix<f64> {
        let d = self.mass.map(|m| (self.spacing / m).sqrt());
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| d[i] * self.stencil[(i, j)] * d[j])
    }

    /// Diagonal `m_i^{-1/2}` that turns a function of [`Self::symmetric`]
    /// into kernel values: `k(t_i, t_j) ≈ c_i f(T)_{ij} c_j`.
    pub fn kernel_scaling(&self) -> DVector<f64> {
        self.mass.map(|m| 1.0 / m.sqrt())
    }
}
