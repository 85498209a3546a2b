use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative symmetry defect accepted by [`eigh`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Ascending eigenvalues and orthonormal eigenvectors (columns) of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// `max |A - Aᵀ| / max |A|` (zero for the zero matrix).
pub fn symmetry_defect(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..j {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Dense symmetric eigendecomposition.
///
/// Eigenvalues come out ascending and each eigenvector is normalised so that
/// its first component of non-negligible size is positive, which makes the
/// output reproducible even inside degenerate clusters.
pub fn eigh(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::invalid(format!("eigh needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let defect = symmetry_defect(a);
    if defect > SYMMETRY_TOL {
        return Err(Error::invalid(format!("matrix is not symmetric (relative defect {defect:e})")));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let raw = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n.max(10)).ok_or(Error::NoConvergence(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw.eigenvalues[i].total_cmp(&raw.eigenvalues[j]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| raw.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = raw.eigenvectors.column(src).into_owned();
        let cut = 1e-8 * col.amax();
        if let Some(first) = col.iter().find(|x| x.abs() > cut) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl EigenDecomposition {
    /// Assembles a decomposition from parts the caller guarantees to be
    /// ascending eigenvalues with orthonormal eigenvector columns.
    pub(crate) fn from_sorted_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Q f(Λ) Qᵀ` for real-valued `f`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let mut values = Vec::with_capacity(self.dim());
        for &lambda in self.eigenvalues.iter() {
            let v = f(lambda);
            if !v.is_finite() {
                return Err(Error::NonFiniteAtEigenvalue { eigenvalue: lambda });
            }
            values.push(v);
        }
        Ok(self.assemble(&values))
    }

    /// `Q f(Λ) Qᵀ` for complex-valued `f`.
    pub fn apply_fn_complex(&self, f: impl Fn(f64) -> Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let mut scaled = DMatrix::<Complex64>::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = f(lambda);
            if !v.is_finite() {
                return Err(Error::NonFiniteAtEigenvalue { eigenvalue: lambda });
            }
            for i in 0..n {
                scaled[(i, k)] = v * self.eigenvectors[(i, k)];
            }
        }
        let qt = self.eigenvectors.transpose().map(Complex64::from);
        Ok(scaled * qt)
    }

    /// Spectral projection `1_{(-∞, α)}(A)`; the inequality is strict.
    pub fn spectral_projection(&self, alpha: f64) -> DMatrix<f64> {
        let values: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l < alpha { 1.0 } else { 0.0 })
            .collect();
        self.assemble(&values)
    }

    /// `(A - z)^{-1}`.
    pub fn resolvent(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_resolvent_set(z)?;
        self.apply_fn_complex(|l| 1.0 / (Complex64::from(l) - z))
    }

    /// `(A - z)^{-1}` for real `z`, staying in real arithmetic.
    pub fn resolvent_real(&self, z: f64) -> Result<DMatrix<f64>> {
        self.check_resolvent_set(Complex64::from(z))?;
        self.apply_fn(|l| 1.0 / (l - z))
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.assemble(self.eigenvalues.as_slice())
    }

    fn check_resolvent_set(&self, z: Complex64) -> Result<()> {
        for &l in self.eigenvalues.iter() {
            let d = (Complex64::from(l) - z).norm();
            if d <= 1e-12 {
                return Err(Error::SingularResolvent {
                    z: z.to_string(),
                    eigenvalue: l,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    fn assemble(&self, values: &[f64]) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &v) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(v);
        }
        scaled * self.eigenvectors.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&b + b.transpose()) * 0.5
    }

    #[test]
    fn identity_and_diagonal() {
        let e = eigh(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.eigenvalues().as_slice(), &[1.0, 1.0, 1.0]);

        let e = eigh(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]))).unwrap();
        assert_eq!(e.eigenvalues().as_slice(), &[1.0, 2.0, 3.0]);
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((e.eigenvectors() - perm).amax() < 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eigh(&a).unwrap();
        assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        let q = e.eigenvectors();
        assert!((q[(0, 0)] - s).abs() < 1e-14 && (q[(1, 0)] + s).abs() < 1e-14);
        assert!((q[(0, 1)] - s).abs() < 1e-14 && (q[(1, 1)] - s).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eigh(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for seed in 0..5 {
            let a = random_symmetric(30, seed);
            let e = eigh(&a).unwrap();
            assert!((e.reconstruct() - &a).amax() <= 1e-10 * a.amax());
            let q = e.eigenvectors();
            assert!((q.transpose() * q - DMatrix::identity(30, 30)).amax() <= 1e-10);
            assert!(e.eigenvalues().as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn apply_fn_examples() {
        let a = random_symmetric(6, 9);
        let e = eigh(&a).unwrap();
        assert!((e.apply_fn(|x| x).unwrap() - &a).amax() < 1e-12);

        let l = eigh(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 3.0]))).unwrap();
        let f = l.apply_fn(|x| (x + 1.0).powf(-0.5)).unwrap();
        assert!((f - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5]))).amax() < 1e-15);
        let p = l.apply_fn(|x| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(p, DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])));

        match l.apply_fn(|x| 1.0 / (x - 3.0)) {
            Err(Error::NonFiniteAtEigenvalue { eigenvalue }) => assert_eq!(eigenvalue, 3.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectral_projection_examples() {
        let e = eigh(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
        assert_eq!(e.spectral_projection(0.5), DMatrix::zeros(2, 2));
        assert_eq!(e.spectral_projection(2.5), DMatrix::identity(2, 2));
        assert_eq!(
            e.spectral_projection(2.0),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))
        );
    }

    #[test]
    fn resolvent_examples() {
        let e = eigh(&DMatrix::from_element(1, 1, 0.0)).unwrap();
        assert_eq!(e.resolvent_real(-1.0).unwrap()[(0, 0)], 1.0);

        let e = eigh(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0]))).unwrap();
        let r = e.resolvent_real(-1.0).unwrap();
        assert!((r - DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.25]))).amax() < 1e-15);

        // brute-force 2x2 inverse of [[2, 1], [1, 2]] = A + 2
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = eigh(&a).unwrap().resolvent(Complex64::new(-2.0, 0.0)).unwrap();
        let inv = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]) / 3.0;
        assert!((r.map(|z| z.re) - inv).amax() < 1e-12);
        assert!(r.iter().all(|z| z.im.abs() < 1e-15));

        assert!(matches!(
            e.resolvent(Complex64::new(3.0, 0.0)),
            Err(Error::SingularResolvent { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn projection_is_idempotent_and_commutes(seed in any::<u64>(), n in 2usize..12, alpha in -1.5f64..1.5) {
            let a = random_symmetric(n, seed);
            let e = eigh(&a).unwrap();
            let p = e.spectral_projection(alpha);
            prop_assert!((&p * &p - &p).amax() <= 1e-10);
            prop_assert!((&p * &a - &a * &p).amax() <= 1e-8 * a.amax().max(1e-300));
        }

        #[test]
        fn first_resolvent_identity(seed in any::<u64>(), n in 2usize..10, zr in -3.0f64..3.0, zi in 0.1f64..2.0, wr in -3.0f64..3.0, wi in -2.0f64..-0.1) {
            let a = random_symmetric(n, seed);
            let e = eigh(&a).unwrap();
            let (z, w) = (Complex64::new(zr, zi), Complex64::new(wr, wi));
            let rz = e.resolvent(z).unwrap();
            let rw = e.resolvent(w).unwrap();
            let lhs = &rz - &rw;
            let rhs = (&rz * &rw) * (z - w);
            let scale = lhs.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let err = (lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-8 * scale);
        }

        #[test]
        fn exponential_semigroup(seed in any::<u64>(), n in 2usize..10, s in 0.0f64..2.0, t in 0.0f64..2.0, c in -1.0f64..1.0) {
            let a = random_symmetric(n, seed);
            let e = eigh(&a).unwrap();
            let fs = e.apply_fn(|x| (c * x * s).exp()).unwrap();
            let ft = e.apply_fn(|x| (c * x * t).exp()).unwrap();
            let fst = e.apply_fn(|x| (c * x * (s + t)).exp()).unwrap();
            prop_assert!((fs * ft - &fst).amax() <= 1e-9 * fst.amax());
        }
    }
}
