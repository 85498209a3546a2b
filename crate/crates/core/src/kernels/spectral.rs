use std::f64::consts::FRAC_2_PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{discretize_kernel, Convention, Grid, NystromMatrix};
use crate::operator::{sqrt_cut, FiberOperator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sin(x)/x`, with a Taylor polynomial near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Which closed-form kernel a [`SpectralKernel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelParameter {
    /// Resolvent difference `(H - z)^{-1} - (H^D - z)^{-1}`.
    Resolvent { z: Complex64 },
    /// Projection difference `1_{(-∞,α]}(H) - 1_{(-∞,α]}(H^D)`.
    Projection { alpha: f64 },
}

/// Hankel-type kernel `k(t, τ) = Q g(Λ, t + τ) Qᵀ` acting fiberwise in the eigenbasis of `L`.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    fiber: FiberOperator,
    parameter: KernelParameter,
}

/// Kernel of `(H - z)^{-1} - (H^D - z)^{-1}`:
/// `i·exp(i√(z−L)(t+τ))·(√(z−L))^{-1}`.
pub fn resolvent_diff_kernel(l: &FiberOperator, z: Complex64) -> Result<SpectralKernel> {
    check_off_cut(l, z)?;
    Ok(SpectralKernel {
        fiber: l.clone(),
        parameter: KernelParameter::Resolvent { z },
    })
}

/// Kernel of the spectral-projection difference for the window `α`:
/// `(2/π)·1_{[0,α)}(L)·sin((α−L)^{1/2}(t+τ))/(t+τ)`.
pub fn projection_diff_kernel(l: &FiberOperator, alpha: f64) -> Result<SpectralKernel> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(SpectralKernel {
        fiber: l.clone(),
        parameter: KernelParameter::Projection { alpha },
    })
}

pub(crate) fn check_off_cut(l: &FiberOperator, z: Complex64) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::invalid(format!("z must be finite, got {z}")));
    }
    if z.im == 0.0 && z.re >= l.min_eigenvalue() {
        return Err(Error::invalid(format!(
            "z = {z} lies on the cut [min σ(L), ∞) = [{}, ∞)",
            l.min_eigenvalue()
        )));
    }
    Ok(())
}

impl SpectralKernel {
    pub fn fiber(&self) -> &FiberOperator {
        &self.fiber
    }

    pub fn parameter(&self) -> KernelParameter {
        self.parameter
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    /// Scalar kernel of the fiber with eigenvalue `lambda`, at `s = t + τ`.
    pub fn fiber_value(&self, lambda: f64, s: f64) -> Complex64 {
        match self.parameter {
            KernelParameter::Resolvent { z } => {
                let w = sqrt_cut(z - lambda);
                I * (I * w * s).exp() / w
            }
            KernelParameter::Projection { alpha } => {
                if lambda < alpha {
                    let c = (alpha - lambda).sqrt();
                    Complex64::from(FRAC_2_PI * c * sinc(c * s))
                } else {
                    Complex64::from(0.0)
                }
            }
        }
    }

    /// `k(t, τ)` as an `m×m` complex block.
    pub fn evaluate(&self, t: f64, tau: f64) -> DMatrix<Complex64> {
        let s = t + tau;
        let eig = self.fiber.eig();
        let q = eig.eigenvectors();
        let d: Vec<Complex64> = eig.eigenvalues().iter().map(|&l| self.fiber_value(l, s)).collect();
        let m = self.fiber.dim();
        DMatrix::from_fn(m, m, |a, b| (0..m).map(|k| d[k] * (q[(a, k)] * q[(b, k)])).sum())
    }

    /// Real part of [`Self::evaluate`]; exact when `z` is real or for projection kernels.
    pub fn evaluate_real(&self, t: f64, tau: f64) -> DMatrix<f64> {
        self.evaluate(t, tau).map(|z| z.re)
    }

    /// True when every value of the kernel is real.
    pub fn is_real(&self) -> bool {
        match self.parameter {
            KernelParameter::Resolvent { z } => z.im == 0.0,
            KernelParameter::Projection { .. } => true,
        }
    }

    pub fn discretize(&self, grid: &Grid, convention: Convention) -> Result<NystromMatrix<Complex64>> {
        discretize_kernel(|t, s| self.evaluate(t, s), self.fiber_dim(), grid, convention)
    }

    /// Real discretisation; fails for a resolvent kernel at non-real `z`.
    pub fn discretize_real(&self, grid: &Grid, convention: Convention) -> Result<NystromMatrix<f64>> {
        if !self.is_real() {
            return Err(Error::invalid("kernel is complex-valued; use discretize"));
        }
        discretize_kernel(|t, s| self.evaluate_real(t, s), self.fiber_dim(), grid, convention)
    }

    /// Symmetrized Nyström matrix of the scalar kernel of one fiber value.
    pub fn fiber_block(&self, lambda: f64, grid: &Grid) -> Result<DMatrix<f64>> {
        let m = discretize_kernel(
            |t, s| DMatrix::from_element(1, 1, self.fiber_value(lambda, t + s).re),
            1,
            grid,
            Convention::Symmetrized,
        )?;
        Ok(m.into_data())
    }
}
