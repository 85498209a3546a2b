use num_complex::Complex64;

/// Square root with the branch cut along the positive half-axis.
///
/// Returns the root `w` with `w² = z` and `Im w ≥ 0`. On `[0, ∞)` the limit
/// from the upper half-plane is taken, so `sqrt_cut(x) = √x` there, while
/// `sqrt_cut(-x) = i√x` for `x > 0`. Consequently `i·sqrt_cut(z - λ)` equals
/// `-(λ - z)^{1/2}` for real `z < λ`, which makes `exp(i·sqrt_cut(z - λ)·t)`
/// decay in `t`.
pub fn sqrt_cut(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let r = x.hypot(y);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // (a, b) with a, b ≥ 0 and a² - b² = x, 2ab = |y|, avoiding cancellation
    let (a, b) = if x >= 0.0 {
        let a = ((r + x) * 0.5).sqrt();
        (a, y.abs() / (2.0 * a))
    } else {
        let b = ((r - x) * 0.5).sqrt();
        (y.abs() / (2.0 * b), b)
    };
    // y = -0.0 counts as the upper half-plane limit
    if y < 0.0 {
        Complex64::new(-a, b)
    } else {
        Complex64::new(a, b)
    }
}
