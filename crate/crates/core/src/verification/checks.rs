use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{CheckReport, ReportBuilder};
use super::spectra::{
    block_spectral_norm, block_spectrum, fiber_blocks, fill_fraction, multiset_distance, quadrature_symmetrize,
};
use crate::error::{Error, Result};
use crate::grid::{make_uniform_grid, weighted_inner, Convention, Grid, NystromMatrix};
use crate::kernels::{
    krein_assemble, projection_diff_kernel, resolvent_diff_kernel, separated_variables_operator, solution_operator,
    ThetaAlpha,
};
use crate::operator::{eigh, fiber_sum, laplacian_half_line, Boundary, FiberOperator, TensorSumOperator};

pub const KERNEL_TOL: f64 = 1e-2;
pub const EXACT_TOL: f64 = 1e-12;
pub const PROJECTION_SUP_TOL: f64 = 0.05;
pub const TRANSFORMATION_TOL: f64 = 1e-10;
pub const SPECTRUM_TOL: f64 = 1e-3;
pub const SPECTRUM_BOUND_SLACK: f64 = 0.02;
pub const ZERO_OPERATOR_TOL: f64 = 1e-8;
pub const FILL_TARGET: f64 = 0.95;
pub const FILL_MESH: f64 = 0.05;
pub const FILL_RADIUS: f64 = 0.05;
pub const PAIRING_TOL: f64 = 1e-10;

/// The Neumann and Dirichlet Kronecker sums `H` and `H^D` on `grid`.
pub fn fd_pair(l: &FiberOperator, grid: &Grid) -> Result<(TensorSumOperator, TensorSumOperator)> {
    let n = TensorSumOperator::half_line(&laplacian_half_line(grid, Boundary::Neumann)?, l)?;
    let d = TensorSumOperator::half_line(&laplacian_half_line(grid, Boundary::Dirichlet)?, l)?;
    Ok((n, d))
}

/// `f(H) − f(H^D)` in kernel units, embedded with the quadrature weights as a
/// symmetrized Nyström matrix.
pub fn fd_difference(l: &FiberOperator, grid: &Grid, f: impl Fn(f64) -> f64 + Copy) -> Result<NystromMatrix<f64>> {
    let (hn, hd) = fd_pair(l, grid)?;
    let kn = hn.to_kernel_values(&hn.apply_fn(f)?);
    let kd = hd.to_kernel_values(&hd.apply_fn(f)?);
    NystromMatrix::new(
        quadrature_symmetrize(&(kn - kd), grid, l.dim()),
        Convention::Symmetrized,
        grid.clone(),
        l.dim(),
    )
}

/// `(H − z)^{-1} − (H^D − z)^{-1}`, symmetrized.
pub fn fd_resolvent_difference(l: &FiberOperator, grid: &Grid, z: f64) -> Result<NystromMatrix<f64>> {
    require_below(l, z)?;
    fd_difference(l, grid, |lambda| 1.0 / (lambda - z))
}

/// `1_{(-∞,α)}(H) − 1_{(-∞,α)}(H^D)`, symmetrized.
pub fn fd_projection_difference(l: &FiberOperator, grid: &Grid, alpha: f64) -> Result<NystromMatrix<f64>> {
    require_alpha(alpha)?;
    fd_difference(l, grid, |lambda| if lambda < alpha { 1.0 } else { 0.0 })
}

fn require_below(l: &FiberOperator, z: f64) -> Result<()> {
    if !(z < l.min_eigenvalue()) {
        return Err(Error::invalid(format!(
            "z = {z} must be real and below min σ(L) = {}",
            l.min_eigenvalue()
        )));
    }
    Ok(())
}

fn require_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

fn base_params(b: &mut ReportBuilder, l: &FiberOperator, grid: &Grid) {
    b.param("n_points", grid.len())
        .param("t_max", grid.t_max())
        .param("fiber_eigenvalues", l.eigenvalues());
}

fn relative_norm(diff: &DMatrix<f64>, reference: &DMatrix<f64>, l: &FiberOperator) -> Result<f64> {
    let num = block_spectral_norm(&fiber_blocks(diff, l))?;
    let den = block_spectral_norm(&fiber_blocks(reference, l))?;
    Ok(if den == 0.0 { num } else { num / den })
}

fn max_abs_c(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Finite-difference resolvent difference against the Nyström matrix of the closed-form kernel.
pub fn check_resolvent_kernel(l: &FiberOperator, grid: &Grid, z: f64) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("resolvent-kernel");
    base_params(&mut b, l, grid);
    b.param("z", z);
    let fd = fd_resolvent_difference(l, grid, z)?;
    let kernel = resolvent_diff_kernel(l, Complex64::from(z))?.discretize_real(grid, Convention::Symmetrized)?;
    let diff = fd.data() - kernel.data();
    b.residual("relative_spectral_error", relative_norm(&diff, fd.data(), l)?, KERNEL_TOL);
    Ok(b.finish(KERNEL_TOL))
}

/// Finite-difference resolvent difference against the boundary-pair assembly,
/// and the assembly against the kernel discretisation.
pub fn check_krein_formula(l: &FiberOperator, grid: &Grid, z: f64) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("krein-formula");
    base_params(&mut b, l, grid);
    b.param("z", z);
    require_below(l, z)?;
    let zc = Complex64::from(z);
    let assembled = krein_assemble(l, zc, grid)?;
    let kernel = resolvent_diff_kernel(l, zc)?.discretize(grid, Convention::RightWeighted)?;
    let scale = max_abs_c(kernel.data()).max(f64::MIN_POSITIVE);
    let exact = max_abs_c(&(assembled.data() - kernel.data())) / scale;

    let sym = assembled.to_real(1e-12 * scale)?.to_convention(Convention::Symmetrized);
    let fd = fd_resolvent_difference(l, grid, z)?;
    let diff = fd.data() - sym.data();
    b.residual("relative_spectral_error", relative_norm(&diff, fd.data(), l)?, KERNEL_TOL)
        .residual("assembly_vs_kernel", exact, EXACT_TOL);
    Ok(b.finish(KERNEL_TOL))
}

/// Subwindow of the `(t, τ)` plane on which kernel values are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    /// `[0.5, T/6]`.
    pub fn default_for(grid: &Grid) -> Self {
        Self {
            lo: 0.5,
            hi: grid.t_max() / 6.0,
        }
    }
}

/// `1_{(-∞,θ)}` of a fiber-diagonal matrix, computed block by block.
fn blockwise_projection(a: &DMatrix<f64>, l: &FiberOperator, theta: f64) -> Result<DMatrix<f64>> {
    let blocks = fiber_blocks(a, l)
        .blocks
        .iter()
        .map(|blk| Ok(eigh(&((blk + blk.transpose()) * 0.5))?.spectral_projection(theta)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fiber_sum(&blocks, l))
}

/// Finite-difference spectral-projection difference against the closed-form
/// kernel on a subwindow, plus the transformation rule between the windows
/// of the operators and of their resolvents at `-1`.
pub fn check_projection_kernel(
    l: &FiberOperator,
    grid: &Grid,
    ta: ThetaAlpha,
    window: Option<Window>,
) -> Result<CheckReport> {
    let alpha = ta.alpha();
    require_alpha(alpha)?;
    let w = window.unwrap_or_else(|| Window::default_for(grid));
    if !(w.lo < w.hi) {
        return Err(Error::invalid(format!("empty window [{}, {}]", w.lo, w.hi)));
    }
    let mut b = ReportBuilder::new("projection-kernel");
    base_params(&mut b, l, grid);
    b.param("theta", ta.theta())
        .param("alpha", alpha)
        .param("window", json!([w.lo, w.hi]));

    let (hn, hd) = fd_pair(l, grid)?;
    let pn = hn.spectral_projection(alpha);
    let pd = hd.spectral_projection(alpha);
    let kernel_units = hn.to_kernel_values(&pn) - hd.to_kernel_values(&pd);

    let kernel = projection_diff_kernel(l, alpha)?;
    let idx = grid.indices_in(w.lo, w.hi);
    if idx.is_empty() {
        return Err(Error::invalid(format!("window [{}, {}] contains no grid nodes", w.lo, w.hi)));
    }
    let m = l.dim();
    let t = grid.nodes();
    let mut sup = 0.0f64;
    for &i in &idx {
        for &j in &idx {
            let k = kernel.evaluate_real(t[i], t[j]);
            for a in 0..m {
                for c in 0..m {
                    sup = sup.max((kernel_units[(i * m + a, j * m + c)] - k[(a, c)]).abs());
                }
            }
        }
    }

    let a0 = hd.resolvent(-1.0)?;
    let a1 = hn.resolvent(-1.0)?;
    let resolvent_side = blockwise_projection(&a0, l, ta.theta())? - blockwise_projection(&a1, l, ta.theta())?;
    let transformation = (resolvent_side - (&pn - &pd)).amax();

    b.param("window_points", idx.len())
        .residual("sup_error", sup, PROJECTION_SUP_TOL)
        .residual("transformation_rule", transformation, TRANSFORMATION_TOL);
    Ok(b.finish(PROJECTION_SUP_TOL))
}

/// Spectrum of the finite-difference resolvent difference against the mapped
/// fiber eigenvalues and against the separated-variables operator.
pub fn check_resolvent_diff_spectrum(l: &FiberOperator, grid: &Grid, z: f64) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("resolvent-spectrum");
    base_params(&mut b, l, grid);
    b.param("z", z);
    let fd = fd_resolvent_difference(l, grid, z)?;
    let spectrum = block_spectrum(&fiber_blocks(fd.data(), l))?;

    let m = l.dim();
    let mut by_magnitude = spectrum.clone();
    by_magnitude.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    let top: Vec<f64> = by_magnitude[..m].to_vec();
    let rest = by_magnitude[m..].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut expected: Vec<f64> = l.eigenvalues().iter().map(|lambda| 0.5 / (lambda - z)).collect();
    expected.sort_by(|x, y| y.total_cmp(x));

    let sep = separated_variables_operator(l, z, grid)?;
    let sep_spectrum = block_spectrum(&fiber_blocks(sep.data(), l))?;

    b.residual("mapped_eigenvalues", multiset_distance(&expected, &top), SPECTRUM_TOL)
        .residual("remaining_magnitude", rest, SPECTRUM_TOL)
        .residual("separated_variables", multiset_distance(&spectrum, &sep_spectrum), SPECTRUM_TOL)
        .spectrum("expected", expected)
        .spectrum("top", top);
    Ok(b.finish(SPECTRUM_TOL))
}

/// Spectral dichotomy of the finite-difference projection difference.
///
/// Always checked: the spectrum lies in `[-1-δ, 1+δ]`. Then, by branch:
/// no fiber value below `α` gives the zero operator; fiber values at or
/// above `α` give a zero cluster of dimension at least `N` each; fiber
/// values below `α` give a band whose fill of `[-1, 1]` does not decrease
/// from the half-resolution grid `(N/2, T/2)` and reaches [`FILL_TARGET`].
pub fn check_projection_diff_spectrum(l: &FiberOperator, grid: &Grid, ta: ThetaAlpha) -> Result<CheckReport> {
    let alpha = ta.alpha();
    require_alpha(alpha)?;
    let mut b = ReportBuilder::new("projection-spectrum");
    base_params(&mut b, l, grid);
    b.param("theta", ta.theta()).param("alpha", alpha);

    let spectrum_of = |g: &Grid| -> Result<Vec<f64>> {
        let p = fd_projection_difference(l, g, alpha)?;
        block_spectrum(&fiber_blocks(p.data(), l))
    };
    let spectrum = spectrum_of(grid)?;
    let norm = spectrum.iter().map(|x| x.abs()).fold(0.0, f64::max);
    b.residual("bound_excess", (norm - 1.0).max(0.0), SPECTRUM_BOUND_SLACK);

    let below = l.eigenvalues().iter().filter(|&&lambda| lambda < alpha).count();
    let at_or_above = l.dim() - below;
    let mut branches = Vec::new();
    if below == 0 {
        branches.push("zero-operator");
        b.residual("operator_norm", norm, ZERO_OPERATOR_TOL);
    }
    if at_or_above > 0 && below > 0 {
        branches.push("zero-cluster");
        let required = grid.len() * at_or_above;
        let cluster = spectrum.iter().filter(|x| x.abs() <= ZERO_OPERATOR_TOL).count();
        b.param("zero_cluster_dim", cluster)
            .residual("zero_cluster_deficit", required.saturating_sub(cluster) as f64, 0.0);
    }
    if below > 0 {
        branches.push("band");
        let fill = fill_fraction(&spectrum, FILL_MESH, FILL_RADIUS);
        let coarse = make_uniform_grid((grid.len() / 2).max(2), grid.t_max() / 2.0)?;
        let coarse_fill = fill_fraction(&spectrum_of(&coarse)?, FILL_MESH, FILL_RADIUS);
        b.param("fill", fill)
            .param("coarse_fill", coarse_fill)
            .residual("fill_decrease", (coarse_fill - fill).max(0.0), 0.0)
            .residual("fill_shortfall", (FILL_TARGET - fill).max(0.0), 0.0);
    }
    b.param("branch", branches.join("+")).spectrum("eigenvalues", spectrum);
    Ok(b.finish(SPECTRUM_BOUND_SLACK))
}

/// Both sides of the spectral-measure pairing for a Kronecker sum `T₁ ⊗ I + I ⊗ T₂`:
/// `⟨1_{(-∞,α)}(T₁⊗I + I⊗T₂)(f₁⊗f₂), g₁⊗g₂⟩` against
/// `Σ_j ⟨1_{(-∞,α−λ_j)}(T₁)f₁, g₁⟩·⟨Π_j f₂, g₂⟩`.
pub fn weidmann_sides(
    t1: &DMatrix<f64>,
    t2: &DMatrix<f64>,
    alpha: f64,
    f1: &DVector<f64>,
    g1: &DVector<f64>,
    f2: &DVector<f64>,
    g2: &DVector<f64>,
) -> Result<(f64, f64)> {
    let (n, m) = (t1.nrows(), t2.nrows());
    if !t1.is_square() || !t2.is_square() || f1.len() != n || g1.len() != n || f2.len() != m || g2.len() != m {
        return Err(Error::invalid(format!(
            "dimension mismatch: T1 {}x{}, T2 {}x{}, f1 {}, g1 {}, f2 {}, g2 {}",
            t1.nrows(),
            t1.ncols(),
            t2.nrows(),
            t2.ncols(),
            f1.len(),
            g1.len(),
            f2.len(),
            g2.len()
        )));
    }
    let sum = t1.kronecker(&DMatrix::identity(m, m)) + DMatrix::<f64>::identity(n, n).kronecker(t2);
    let lhs = g1.kronecker(g2).dot(&(eigh(&sum)?.spectral_projection(alpha) * f1.kronecker(f2)));

    let e1 = eigh(t1)?;
    let e2 = eigh(t2)?;
    let mut rhs = 0.0;
    for (j, &lambda) in e2.eigenvalues().iter().enumerate() {
        let p = e2.eigenvectors().column(j);
        let pi = p.dot(f2) * p.dot(g2);
        rhs += g1.dot(&(e1.spectral_projection(alpha - lambda) * f1)) * pi;
    }
    Ok((lhs, rhs))
}

pub fn check_weidmann_pairing(
    t1: &DMatrix<f64>,
    t2: &DMatrix<f64>,
    alpha: f64,
    f1: &DVector<f64>,
    g1: &DVector<f64>,
    f2: &DVector<f64>,
    g2: &DVector<f64>,
) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("weidmann-pairing");
    let (lhs, rhs) = weidmann_sides(t1, t2, alpha, f1, g1, f2, g2)?;
    b.param("alpha", alpha)
        .param("dims", json!([t1.nrows(), t2.nrows()]))
        .param("lhs", lhs)
        .param("rhs", rhs)
        .residual("pairing_error", (lhs - rhs).abs(), PAIRING_TOL);
    Ok(b.finish(PAIRING_TOL))
}

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose()
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// `count` seeded random instances with `T₁` up to 8×8 and `T₂` up to 6×6,
/// nonnegative, and `α` uniform on the range of the pairwise eigenvalue sums.
pub fn check_weidmann_random(seed: u64, count: usize) -> Result<CheckReport> {
    if count == 0 {
        return Err(Error::invalid("at least one instance is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=6);
        let t1 = random_psd(n, &mut rng);
        let t2 = random_psd(m, &mut rng);
        let top = eigh(&t1)?.max_eigenvalue() + eigh(&t2)?.max_eigenvalue();
        let alpha = rng.gen_range(-0.5..top + 0.5);
        let (f1, g1) = (random_vector(n, &mut rng), random_vector(n, &mut rng));
        let (f2, g2) = (random_vector(m, &mut rng), random_vector(m, &mut rng));
        let (lhs, rhs) = weidmann_sides(&t1, &t2, alpha, &f1, &g1, &f2, &g2)?;
        worst = worst.max((lhs - rhs).abs());
    }
    let mut b = ReportBuilder::new("weidmann-pairing");
    b.param("seed", seed)
        .param("instances", count)
        .residual("pairing_error", worst, PAIRING_TOL);
    Ok(b.finish(PAIRING_TOL))
}

/// `|u(t_1)|² / (4(‖u‖² + ‖u′‖² + ‖L^{1/2}u‖²))` with quadrature norms and
/// forward differences; zero for `u = 0`.
pub fn trace_ratio(u: &DVector<f64>, l: &FiberOperator, grid: &Grid) -> Result<f64> {
    let m = l.dim();
    let n = grid.len();
    if u.len() != n * m {
        return Err(Error::invalid(format!("vector of length {} on a {}x{} space", u.len(), n, m)));
    }
    let h = grid.spacing();
    let norm2 = weighted_inner(u, u, grid, m)?;
    let mut deriv2 = 0.0;
    for i in 0..n - 1 {
        for a in 0..m {
            deriv2 += h * ((u[(i + 1) * m + a] - u[i * m + a]) / h).powi(2);
        }
    }
    let mut form = 0.0;
    for (i, w) in grid.weights().iter().enumerate() {
        let ui = u.rows(i * m, m);
        form += w * ui.dot(&(l.matrix() * ui));
    }
    let trace = u.rows(0, m).norm_squared();
    let energy = norm2 + deriv2 + form;
    Ok(if energy == 0.0 { 0.0 } else { trace / (4.0 * energy) })
}

/// `‖S(-1)φ‖² / (½‖φ‖²)` with the quadrature norm.
pub fn solution_norm_ratio(s: &DMatrix<f64>, phi: &DVector<f64>, grid: &Grid) -> Result<f64> {
    let m = phi.len();
    let u = s * phi;
    let p = phi.norm_squared();
    Ok(if p == 0.0 { 0.0 } else { weighted_inner(&u, &u, grid, m)? / (0.5 * p) })
}

/// Low-frequency samples `u(t) = Σ_k cos((k−½)πt/T)·φ_k`, `k = 1..modes`.
pub fn band_limited(coeffs: &[DVector<f64>], grid: &Grid) -> DVector<f64> {
    let m = coeffs.first().map_or(0, |c| c.len());
    let t_max = grid.t_max();
    let mut u = DVector::zeros(grid.len() * m);
    for (i, &t) in grid.nodes().iter().enumerate() {
        for (k, phi) in coeffs.iter().enumerate() {
            let c = ((k as f64 + 0.5) * std::f64::consts::PI * t / t_max).cos();
            for a in 0..m {
                u[i * m + a] += c * phi[a];
            }
        }
    }
    u
}

const BAND_MODES: usize = 6;

/// Seeded trace and elliptic-regularity bounds, each judged against `1 + 10h`.
pub fn check_boundary_bounds(l: &FiberOperator, grid: &Grid, n_samples: usize, seed: u64) -> Result<CheckReport> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let mut b = ReportBuilder::new("boundary-bounds");
    base_params(&mut b, l, grid);
    b.param("samples", n_samples).param("seed", seed);
    let m = l.dim();
    let tol = 1.0 + 10.0 * grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut trace = 0.0f64;
    for _ in 0..n_samples {
        let coeffs: Vec<DVector<f64>> = (0..BAND_MODES).map(|_| random_vector(m, &mut rng)).collect();
        trace = trace.max(trace_ratio(&band_limited(&coeffs, grid), l, grid)?);
    }

    let s = solution_operator(l, Complex64::from(-1.0), grid)?.map(|z| z.re);
    let mut solution = 0.0f64;
    for _ in 0..n_samples {
        solution = solution.max(solution_norm_ratio(&s, &random_vector(m, &mut rng), grid)?);
    }
    b.residual("trace_ratio", trace, tol)
        .residual("solution_norm_ratio", solution, tol);
    Ok(b.finish(tol))
}
