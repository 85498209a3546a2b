//! Boundary-pair objects of the half-line problem: the solution operator
//! `S(z)`, the Dirichlet-to-Neumann operator `Λ(z)` and the Krein-type
//! factorisation of the resolvent difference.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::spectral::check_off_cut;
use crate::error::Result;
use crate::grid::{Convention, Grid, NystromMatrix};
use crate::operator::{sqrt_cut, FiberOperator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Grid samples of `S(z)φ = exp(i√(z−L)·t)φ`: an `(N·m)×m` matrix whose row
/// block `i` is `exp(i√(z−L)·t_i)`.
pub fn solution_operator(l: &FiberOperator, z: Complex64, grid: &Grid) -> Result<DMatrix<Complex64>> {
    check_off_cut(l, z)?;
    let m = l.dim();
    let n = grid.len();
    let mut out = DMatrix::zeros(n * m, m);
    for (i, &t) in grid.nodes().iter().enumerate() {
        let block = l.eig().apply_fn_complex(|lambda| (I * sqrt_cut(z - lambda) * t).exp())?;
        out.view_mut((i * m, 0), (m, m)).copy_from(&block);
    }
    Ok(out)
}

/// `Λ(z) = −i√(z−L)`, the normal derivative `-∂_t S(z)φ` at `t = 0`.
pub fn dtn_operator(l: &FiberOperator, z: Complex64) -> Result<DMatrix<Complex64>> {
    check_off_cut(l, z)?;
    l.eig().apply_fn_complex(|lambda| -I * sqrt_cut(z - lambda))
}

/// `Λ(z)^{-1} = i(√(z−L))^{-1}`, the Neumann-to-Dirichlet operator.
pub fn ntd_operator(l: &FiberOperator, z: Complex64) -> Result<DMatrix<Complex64>> {
    check_off_cut(l, z)?;
    l.eig().apply_fn_complex(|lambda| I / sqrt_cut(z - lambda))
}

/// `S̄(z) Λ(z)^{-1} S̄(z̄)*` on the grid, in the right-weighted convention.
///
/// The adjoint is taken for the quadrature inner product: block `j` of
/// `S̄(z̄)*` is `exp(i√(z̄−L)·t_j)^H · w_j`.
pub fn krein_assemble(l: &FiberOperator, z: Complex64, grid: &Grid) -> Result<NystromMatrix<Complex64>> {
    let s = solution_operator(l, z, grid)?;
    let ntd = ntd_operator(l, z)?;
    let s_conj = solution_operator(l, z.conj(), grid)?;
    let m = l.dim();
    let w = grid.weights();
    let mut adjoint = s_conj.adjoint();
    for c in 0..adjoint.ncols() {
        adjoint.column_mut(c).scale_mut(w[c / m]);
    }
    let data = s * ntd * adjoint;
    NystromMatrix::new(data, Convention::RightWeighted, grid.clone(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::kernels::resolvent_diff_kernel;
    use crate::operator::eigh;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn solution_operator_samples_exponentials() {
        let g = make_uniform_grid(50, 5.0).unwrap();
        let s = solution_operator(&FiberOperator::diagonal(&[0.0]).unwrap(), c(-1.0), &g).unwrap();
        for (i, &t) in g.nodes().iter().enumerate() {
            assert!((s[(i, 0)] - c((-t).exp())).norm() < 1e-15);
        }
        let s = solution_operator(&FiberOperator::diagonal(&[3.0]).unwrap(), c(-1.0), &g).unwrap();
        for (i, &t) in g.nodes().iter().enumerate() {
            assert!((s[(i, 0)] - c((-2.0 * t).exp())).norm() < 1e-15);
        }
    }

    #[test]
    fn solution_operator_is_elliptically_regular() {
        let g = make_uniform_grid(800, 30.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let l = FiberOperator::diagonal(&[0.0, 0.5, 2.0]).unwrap();
        let s = solution_operator(&l, c(-1.0), &g).unwrap().map(|z| z.re);
        for _ in 0..100 {
            let phi = nalgebra::DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let u = &s * &phi;
            let norm2 = crate::grid::weighted_inner(&u, &u, &g, 3).unwrap();
            assert!(norm2 <= 0.5 * phi.norm_squared() * (1.0 + 1e-2));
        }
    }

    #[test]
    fn dtn_examples() {
        let l = FiberOperator::diagonal(&[0.0]).unwrap();
        assert!((dtn_operator(&l, c(-1.0)).unwrap()[(0, 0)] - c(1.0)).norm() < 1e-15);

        let l = FiberOperator::diagonal(&[3.0]).unwrap();
        assert!((dtn_operator(&l, c(-1.0)).unwrap()[(0, 0)] - c(2.0)).norm() < 1e-15);
        assert!((ntd_operator(&l, c(-1.0)).unwrap()[(0, 0)] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn dtn_and_ntd_are_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let vals: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..5.0)).collect();
            let l = FiberOperator::diagonal(&vals).unwrap();
            let prod = dtn_operator(&l, c(-2.0)).unwrap() * ntd_operator(&l, c(-2.0)).unwrap();
            assert!(max_abs(&(prod - DMatrix::identity(4, 4))) <= 1e-12);
        }
        // non-real z, non-diagonal L
        let b = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let l = FiberOperator::new(&b * b.transpose()).unwrap();
        let z = Complex64::new(1.5, -0.8);
        let prod = dtn_operator(&l, z).unwrap() * ntd_operator(&l, z).unwrap();
        assert!(max_abs(&(prod - DMatrix::identity(3, 3))) <= 1e-12);
    }

    #[test]
    fn dtn_is_normal_derivative_of_solution() {
        // -(S(z)φ)'(0) by a fourth-order one-sided difference on a fine grid
        let l = FiberOperator::diagonal(&[0.0, 1.5]).unwrap();
        let z = Complex64::new(-0.5, 0.3);
        let h = 1e-3;
        let g = Grid::from_parts(vec![h, 2.0 * h, 3.0 * h, 4.0 * h], vec![h; 4], h, 4.0 * h).unwrap();
        let s = solution_operator(&l, z, &g).unwrap();
        let s0 = DMatrix::<Complex64>::identity(2, 2);
        let c = |x: f64| Complex64::new(x, 0.0);
        let d = (s.view((0, 0), (2, 2)) * c(48.0) - s.view((2, 0), (2, 2)) * c(36.0)
            + s.view((4, 0), (2, 2)) * c(16.0)
            - s.view((6, 0), (2, 2)) * c(3.0)
            - s0 * c(25.0))
            / c(12.0 * h);
        let lambda = dtn_operator(&l, z).unwrap();
        assert!(max_abs(&(lambda + d)) < 1e-8);
    }

    #[test]
    fn krein_scalar_case() {
        let g = make_uniform_grid(40, 4.0).unwrap();
        let k = krein_assemble(&FiberOperator::diagonal(&[0.0]).unwrap(), c(-1.0), &g).unwrap();
        let (t, w) = (g.nodes(), g.weights());
        for i in 0..40 {
            for j in 0..40 {
                let want = (-(t[i] + t[j])).exp() * w[j];
                assert!((k.data()[(i, j)] - c(want)).norm() <= 1e-15);
            }
        }

        let k = krein_assemble(&FiberOperator::diagonal(&[1.0]).unwrap(), c(-1.0), &g).unwrap();
        let r2 = 2.0f64.sqrt();
        for i in 0..40 {
            for j in 0..40 {
                let want = (-r2 * (t[i] + t[j])).exp() * w[j] / r2;
                assert!((k.data()[(i, j)] - c(want)).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn krein_matches_kernel_discretisation() {
        let g = make_uniform_grid(60, 6.0).unwrap();
        let l = FiberOperator::diagonal(&[0.0, 2.0]).unwrap();
        for z in [c(-1.5), Complex64::new(0.4, 0.9), Complex64::new(3.0, -0.2)] {
            let assembled = krein_assemble(&l, z, &g).unwrap();
            let direct = resolvent_diff_kernel(&l, z)
                .unwrap()
                .discretize(&g, Convention::RightWeighted)
                .unwrap();
            let diff = max_abs(&(assembled.data() - direct.data()));
            assert!(diff <= 1e-12 * max_abs(direct.data()), "z = {z}: {diff:e}");
        }
    }

    #[test]
    fn krein_assembly_is_symmetric_and_psd_below_spectrum() {
        let g = make_uniform_grid(80, 8.0).unwrap();
        let l = FiberOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0])).unwrap();
        let sym = krein_assemble(&l, c(-0.3), &g)
            .unwrap()
            .to_real(1e-12)
            .unwrap()
            .to_convention(Convention::Symmetrized);
        let a = sym.data();
        assert!((a - a.transpose()).amax() <= 1e-10 * a.amax());
        assert!(eigh(&((a + a.transpose()) * 0.5)).unwrap().min_eigenvalue() >= -1e-10);
    }
}
