//! Truncated half-line grids, quadrature weights and Nyström matrices.

use nalgebra::{ComplexField, DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Scalar types a kernel may produce (`f64` or `Complex64`).
pub trait KernelScalar: ComplexField<RealField = f64> + Copy + Send + Sync {}
impl<T: ComplexField<RealField = f64> + Copy + Send + Sync> KernelScalar for T {}

/// Uniform grid `t_i = i·h`, `i = 1..=N`, on the truncated half-line `(0, t_max]`.
///
/// The node `t = 0` is excluded. The quadrature is the composite trapezoid
/// rule on `[0, t_max]` with the missing boundary value replaced by the
/// linear extrapolation `f(0) ≈ 2 f(t_1) − f(t_2)`, which keeps the rule
/// second order without a node at the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    spacing: f64,
    t_max: f64,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid from explicit nodes and weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, spacing: f64, t_max: f64) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::invalid("nodes and weights must be nonempty and of equal length"));
        }
        if !(spacing > 0.0) || !(t_max > 0.0) {
            return Err(Error::invalid("spacing and t_max must be positive"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("nodes must be positive and strictly increasing"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::invalid("quadrature weights must be positive"));
        }
        Ok(Self {
            nodes,
            spacing,
            t_max,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `Σ w_i f(t_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// Samples of `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.nodes.iter().map(|&t| f(t)))
    }

    /// Indices of the nodes inside `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i] >= lo && self.nodes[i] <= hi)
            .collect()
    }
}

/// `make_uniform_grid(n, t_max)`: nodes `i·h` with `h = t_max / n`.
pub fn make_uniform_grid(n_points: usize, t_max: f64) -> Result<Grid> {
    if n_points < 2 {
        return Err(Error::invalid(format!("n_points must be at least 2, got {n_points}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
    }
    let h = t_max / n_points as f64;
    let nodes: Vec<f64> = (1..=n_points).map(|i| i as f64 * h).collect();
    let mut weights = vec![h; n_points];
    weights[n_points - 1] = 0.5 * h;
    if n_points == 2 {
        // f(0) ≈ f(t_1): no second interior node to extrapolate from.
        weights[0] = 1.5 * h;
    } else {
        weights[0] = 2.0 * h;
        weights[1] = 0.5 * h;
    }
    Grid::from_parts(nodes, weights, h, t_max)
}

/// How a kernel discretisation is scaled by the quadrature weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Raw kernel values `k(t_i, t_j)`.
    Plain,
    /// `k(t_i, t_j) w_j`: acts on grid samples like the integral operator.
    RightWeighted,
    /// `w_i^{1/2} k(t_i, t_j) w_j^{1/2}`: symmetric for symmetric kernels.
    Symmetrized,
}

/// Dense discretisation of an operator on `L²(0, t_max) ⊗ C^m`.
///
/// Rows and columns are indexed grid-major: index `i·m + a` is node `i`,
/// fiber component `a`.
#[derive(Debug, Clone)]
pub struct NystromMatrix<T: KernelScalar> {
    data: DMatrix<T>,
    convention: Convention,
    grid: Grid,
    fiber_dim: usize,
}

impl<T: KernelScalar> NystromMatrix<T> {
    pub fn new(data: DMatrix<T>, convention: Convention, grid: Grid, fiber_dim: usize) -> Result<Self> {
        let n = grid.len() * fiber_dim;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::invalid(format!(
                "Nyström matrix must be {n}x{n}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            data,
            convention,
            grid,
            fiber_dim,
        })
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<T> {
        self.data
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Re-expresses the same operator in another convention.
    pub fn to_convention(&self, target: Convention) -> Self {
        let (row, col) = scale_factors(self.convention, target);
        let m = self.fiber_dim;
        let w = self.grid.weights();
        let mut data = self.data.clone();
        for c in 0..data.ncols() {
            let cs = col(w[c / m]);
            for r in 0..data.nrows() {
                data[(r, c)] *= T::from_real(row(w[r / m]) * cs);
            }
        }
        Self {
            data,
            convention: target,
            grid: self.grid.clone(),
            fiber_dim: m,
        }
    }
}

impl NystromMatrix<num_complex::Complex64> {
    /// Real part, provided every imaginary part is below `tol` times the largest modulus.
    pub fn to_real(&self, tol: f64) -> Result<NystromMatrix<f64>> {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let worst = self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if worst > tol * scale {
            return Err(Error::invalid(format!(
                "matrix is not real: max |Im| = {worst:e} (scale {scale:e})"
            )));
        }
        Ok(NystromMatrix {
            data: self.data.map(|z| z.re),
            convention: self.convention,
            grid: self.grid.clone(),
            fiber_dim: self.fiber_dim,
        })
    }
}

type Scale = fn(f64) -> f64;

// Multiplies by row(w_i) * col(w_j) to go from `from` to `to`.
fn scale_factors(from: Convention, to: Convention) -> (Scale, Scale) {
    use Convention::*;
    fn one(_: f64) -> f64 {
        1.0
    }
    fn id(w: f64) -> f64 {
        w
    }
    fn inv(w: f64) -> f64 {
        1.0 / w
    }
    fn sqrt(w: f64) -> f64 {
        w.sqrt()
    }
    fn inv_sqrt(w: f64) -> f64 {
        1.0 / w.sqrt()
    }
    match (from, to) {
        (a, b) if a == b => (one, one),
        (Plain, RightWeighted) => (one, id),
        (Plain, Symmetrized) => (sqrt, sqrt),
        (RightWeighted, Plain) => (one, inv),
        (RightWeighted, Symmetrized) => (sqrt, inv_sqrt),
        (Symmetrized, Plain) => (inv_sqrt, inv_sqrt),
        (Symmetrized, RightWeighted) => (inv_sqrt, sqrt),
        _ => unreachable!(),
    }
}

/// Nyström discretisation of a matrix-valued kernel `k(t, τ) ∈ C^{m×m}`.
///
/// Rows are assembled in parallel; the kernel must therefore be `Sync`.
pub fn discretize_kernel<T, F>(
    kernel: F,
    fiber_dim: usize,
    grid: &Grid,
    convention: Convention,
) -> Result<NystromMatrix<T>>
where
    T: KernelScalar,
    F: Fn(f64, f64) -> DMatrix<T> + Sync,
{
    if fiber_dim == 0 {
        return Err(Error::invalid("fiber dimension must be at least 1"));
    }
    let n = grid.len();
    let m = fiber_dim;
    let t = grid.nodes();
    let w = grid.weights();
    let (row_scale, col_scale) = scale_factors(Convention::Plain, convention);

    let rows: Vec<Result<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            // m rows of length n·m, stored row-major
            let mut strip = vec![T::zero(); m * n * m];
            let rs = row_scale(w[i]);
            for j in 0..n {
                let block = kernel(t[i], t[j]);
                if block.nrows() != m || block.ncols() != m {
                    return Err(Error::invalid(format!(
                        "kernel returned a {}x{} block, expected {m}x{m}",
                        block.nrows(),
                        block.ncols()
                    )));
                }
                let s = T::from_real(rs * col_scale(w[j]));
                for a in 0..m {
                    for b in 0..m {
                        let v = block[(a, b)];
                        if !v.is_finite() {
                            return Err(Error::NonFiniteKernel {
                                t: t[i],
                                tau: t[j],
                                value: format!("{v:?}"),
                            });
                        }
                        strip[a * n * m + j * m + b] = v * s;
                    }
                }
            }
            Ok(strip)
        })
        .collect();

    let mut data = DMatrix::<T>::zeros(n * m, n * m);
    for (i, strip) in rows.into_iter().enumerate() {
        let strip = strip?;
        for a in 0..m {
            for c in 0..n * m {
                data[(i * m + a, c)] = strip[a * n * m + c];
            }
        }
    }
    NystromMatrix::new(data, convention, grid.clone(), m)
}

/// Quadrature inner product `Σ_i w_i ⟨u_i, v_i⟩`, conjugate-linear in `v`.
pub fn weighted_inner<T: KernelScalar>(u: &DVector<T>, v: &DVector<T>, grid: &Grid, fiber_dim: usize) -> Result<T> {
    let n = grid.len() * fiber_dim;
    if fiber_dim == 0 || u.len() != n || v.len() != n {
        return Err(Error::invalid(format!(
            "vectors must have length {n} (grid {} x fiber {fiber_dim}), got {} and {}",
            grid.len(),
            u.len(),
            v.len()
        )));
    }
    let w = grid.weights();
    let mut acc = T::zero();
    for k in 0..n {
        acc += u[k] * v[k].conjugate() * T::from_real(w[k / fiber_dim]);
    }
    Ok(acc)
}
