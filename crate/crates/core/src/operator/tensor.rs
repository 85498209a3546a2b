use nalgebra::{DMatrix, DVector};

use super::eigen::{eigh, symmetry_defect, EigenDecomposition};
use super::laplacian::{Boundary, HalfLineLaplacian};
use crate::error::{Error, Result};

/// The transverse operator `L`: a finite real symmetric nonnegative matrix.
#[derive(Debug, Clone)]
pub struct FiberOperator {
    matrix: DMatrix<f64>,
    eig: EigenDecomposition,
}

impl FiberOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::invalid("fiber operator must have dimension at least 1"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("fiber operator has non-finite entries"));
        }
        let defect = symmetry_defect(&matrix);
        if defect > 1e-12 {
            return Err(Error::invalid(format!("fiber operator is not symmetric (defect {defect:e})")));
        }
        let eig = eigh(&matrix)?;
        if eig.min_eigenvalue() < -1e-10 {
            return Err(Error::invalid(format!(
                "fiber operator must be nonnegative, smallest eigenvalue is {}",
                eig.min_eigenvalue()
            )));
        }
        Ok(Self { matrix, eig })
    }

    /// `L = diag(values)`: a sampled spectrum.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eig(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig.eigenvalues().as_slice().to_vec()
    }
}

/// Kronecker sum `T₁ ⊗ I_m + I_N ⊗ L`.
///
/// Functions of the sum are evaluated through the factors: with `L = Σ μ_j p_j p_jᵀ`,
/// `f(T₁ ⊗ I + I ⊗ L) = Σ_j f(T₁ + μ_j) ⊗ p_j p_jᵀ`. This costs `m` eigen-evaluations of
/// size `N` instead of one of size `N·m`.
#[derive(Debug, Clone)]
pub struct TensorSumOperator {
    matrix: DMatrix<f64>,
    first: EigenDecomposition,
    fiber: FiberOperator,
    boundary: Option<Boundary>,
    kernel_scaling: DVector<f64>,
}

/// `kron(t1, I_m) + kron(I_N, L)` for a symmetric `t1`.
pub fn kron_sum(t1: &DMatrix<f64>, l: &FiberOperator) -> Result<TensorSumOperator> {
    let first = eigh(t1)?;
    let n = t1.nrows();
    Ok(TensorSumOperator {
        matrix: assemble_kron_sum(t1, l.matrix()),
        first,
        fiber: l.clone(),
        boundary: None,
        kernel_scaling: DVector::from_element(n, 1.0),
    })
}

/// `Σ_j B_j ⊗ p_j p_jᵀ` over the eigenpairs `(μ_j, p_j)` of `L`, one
/// `N×N` block per fiber eigenvalue.
pub fn fiber_sum(blocks: &[DMatrix<f64>], l: &FiberOperator) -> DMatrix<f64> {
    let m = l.dim();
    assert_eq!(blocks.len(), m, "one block per fiber eigenvalue");
    let n = blocks[0].nrows();
    let p = l.eig().eigenvectors();
    let mut out = DMatrix::zeros(n * m, n * m);
    for (j, g) in blocks.iter().enumerate() {
        let pj = p.column(j);
        for b in 0..m {
            for a in 0..m {
                let c = pj[a] * pj[b];
                if c == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for i in 0..n {
                        out[(i * m + a, k * m + b)] += c * g[(i, k)];
                    }
                }
            }
        }
    }
    out
}

fn assemble_kron_sum(t1: &DMatrix<f64>, l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t1.nrows();
    let m = l.nrows();
    t1.kronecker(&DMatrix::identity(m, m)) + DMatrix::<f64>::identity(n, n).kronecker(l)
}

impl TensorSumOperator {
    /// `H` (Neumann) or `H^D` (Dirichlet) built from a half-line Laplacian.
    pub fn half_line(lap: &HalfLineLaplacian, l: &FiberOperator) -> Result<Self> {
        let t1 = lap.symmetric();
        let mut op = kron_sum(&t1, l)?;
        op.boundary = Some(lap.boundary());
        op.kernel_scaling = lap.kernel_scaling();
        Ok(op)
    }

    /// The assembled `(N·m)×(N·m)` matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.boundary
    }

    pub fn fiber(&self) -> &FiberOperator {
        &self.fiber
    }

    pub fn first_factor(&self) -> &EigenDecomposition {
        &self.first
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// All pairwise sums `λ_i(T₁) + μ_j(L)`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .first
            .eigenvalues()
            .iter()
            .flat_map(|&a| self.fiber.eig().eigenvalues().iter().map(move |&b| a + b))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Eigendecomposition with eigenvectors `q_i ⊗ p_j`.
    pub fn eigen(&self) -> EigenDecomposition {
        let q = self.first.eigenvectors();
        let p = self.fiber.eig().eigenvectors();
        let (n, m) = (q.nrows(), p.nrows());
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                pairs.push((self.first.eigenvalues()[i] + self.fiber.eig().eigenvalues()[j], i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values = DVector::from_iterator(n * m, pairs.iter().map(|p| p.0));
        let mut vectors = DMatrix::zeros(n * m, n * m);
        for (col, &(_, i, j)) in pairs.iter().enumerate() {
            vectors.set_column(col, &q.column(i).kronecker(&p.column(j)));
        }
        EigenDecomposition::from_sorted_parts(values, vectors)
    }

    /// `f(T₁ ⊗ I + I ⊗ L)`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let blocks = self
            .fiber
            .eig()
            .eigenvalues()
            .iter()
            .map(|&mu| self.first.apply_fn(|lambda| f(lambda + mu)))
            .collect::<Result<Vec<_>>>()?;
        Ok(fiber_sum(&blocks, &self.fiber))
    }

    /// `(H - z)^{-1}` for real `z` below the spectrum or in a gap.
    pub fn resolvent(&self, z: f64) -> Result<DMatrix<f64>> {
        for lambda in self.eigenvalues() {
            if (lambda - z).abs() <= 1e-12 {
                return Err(Error::SingularResolvent {
                    z: z.to_string(),
                    eigenvalue: lambda,
                    distance: (lambda - z).abs(),
                });
            }
        }
        self.apply_fn(|lambda| 1.0 / (lambda - z))
    }

    /// `1_{(-∞, α)}(H)`.
    pub fn spectral_projection(&self, alpha: f64) -> DMatrix<f64> {
        self.apply_fn(|lambda| if lambda < alpha { 1.0 } else { 0.0 })
            .expect("indicator is finite")
    }

    /// Converts a function of the operator into kernel values on the grid,
    /// `k(t_i, t_j) = c_i F_{ij} c_j` blockwise, with `c` from
    /// [`HalfLineLaplacian::kernel_scaling`]. For a bare [`kron_sum`] the
    /// scaling is the identity.
    pub fn to_kernel_values(&self, f_of_h: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.fiber.dim();
        let c = &self.kernel_scaling;
        DMatrix::from_fn(f_of_h.nrows(), f_of_h.ncols(), |r, s| c[r / m] * f_of_h[(r, s)] * c[s / m])
    }
}
