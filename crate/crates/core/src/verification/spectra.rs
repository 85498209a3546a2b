//! Spectral utilities shared by the checks.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::grid::Grid;
use crate::operator::{eigh, FiberOperator};

/// `W^{1/2} K W^{1/2}` blockwise, turning kernel values into the symmetric
/// matrix of the integral operator.
pub fn quadrature_symmetrize(kernel_values: &DMatrix<f64>, grid: &Grid, fiber_dim: usize) -> DMatrix<f64> {
    let s: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let m = fiber_dim;
    DMatrix::from_fn(kernel_values.nrows(), kernel_values.ncols(), |r, c| {
        s[r / m] * kernel_values[(r, c)] * s[c / m]
    })
}

/// A grid⊗fiber matrix that commutes with `I ⊗ L`, split along the eigenbasis of `L`.
#[derive(Debug, Clone)]
pub struct FiberBlocks {
    /// One `N×N` block per fiber eigenvalue, in ascending eigenvalue order.
    pub blocks: Vec<DMatrix<f64>>,
    /// Largest off-block entry relative to the largest entry; zero for an exactly
    /// fiber-diagonal matrix.
    pub coupling: f64,
}

/// Conjugates `a` by `I ⊗ P` (`P` = eigenvectors of `L`) and extracts the diagonal fiber blocks.
pub fn fiber_blocks(a: &DMatrix<f64>, l: &FiberOperator) -> FiberBlocks {
    let m = l.dim();
    let n = a.nrows() / m;
    let p = l.eig().eigenvectors();
    let mut blocks = vec![DMatrix::zeros(n, n); m];
    if m == 1 {
        blocks[0] = a.clone();
        return FiberBlocks { blocks, coupling: 0.0 };
    }
    let pt = p.transpose();
    let mut off = 0.0f64;
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for k in 0..n {
        for i in 0..n {
            let y = &pt * a.view((i * m, k * m), (m, m)) * p;
            for x in 0..m {
                for b in 0..m {
                    if x == b {
                        blocks[x][(i, k)] = y[(x, x)];
                    } else {
                        off = off.max(y[(x, b)].abs());
                    }
                }
            }
        }
    }
    FiberBlocks {
        blocks,
        coupling: off / scale,
    }
}

/// Union of the block spectra, ascending.
pub fn block_spectrum(blocks: &FiberBlocks) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for b in &blocks.blocks {
        out.extend_from_slice(eigh(&symmetric_part(b))?.eigenvalues().as_slice());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Spectral norm of a symmetric fiber-diagonal matrix from its blocks.
pub fn block_spectral_norm(blocks: &FiberBlocks) -> Result<f64> {
    let mut norm = 0.0f64;
    for b in &blocks.blocks {
        let e = eigh(&symmetric_part(b))?;
        norm = norm.max(e.min_eigenvalue().abs()).max(e.max_eigenvalue().abs());
    }
    Ok(norm)
}

fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Fraction of the points of a uniform `mesh`-spaced grid of `[-1, 1]`
/// that lie within `radius` of some eigenvalue.
pub fn fill_fraction(eigenvalues: &[f64], mesh: f64, radius: f64) -> f64 {
    let steps = (2.0 / mesh).round() as usize;
    let covered = (0..=steps)
        .map(|k| -1.0 + k as f64 * mesh)
        .filter(|x| eigenvalues.iter().any(|e| (e - x).abs() <= radius + 1e-12))
        .count();
    covered as f64 / (steps + 1) as f64
}

/// Largest distance from `-μ` to the spectrum over the eigenvalues with
/// `|μ| > threshold`; zero when the spectrum is symmetric about the origin.
pub fn reflection_defect(eigenvalues: &[f64], threshold: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|mu| mu.abs() > threshold)
        .map(|mu| {
            eigenvalues
                .iter()
                .map(|e| (e + mu).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Greedy nearest-neighbour pairing of two equally sized multisets.
///
/// Each element of `a`, in order, takes the nearest unused element of `b`
/// (ties go to the lower index). Returns the largest paired distance, or
/// infinity when the sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("sizes match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Largest gap between consecutive eigenvalues inside `[lo, hi]`, counting the window ends.
pub fn largest_gap(eigenvalues: &[f64], lo: f64, hi: f64) -> f64 {
    let mut inside: Vec<f64> = eigenvalues.iter().copied().filter(|e| *e >= lo && *e <= hi).collect();
    inside.sort_by(f64::total_cmp);
    let mut points = vec![lo];
    points.extend(inside);
    points.push(hi);
    points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(rows: &[(f64, f64)]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::kron_sum;

    #[test]
    fn fill_of_dense_and_sparse_spectra() {
        let dense: Vec<f64> = (0..=200).map(|k| -1.0 + k as f64 * 0.01).collect();
        assert_eq!(fill_fraction(&dense, 0.05, 0.05), 1.0);
        assert_eq!(fill_fraction(&[0.0], 0.05, 0.05), 3.0 / 41.0);
        assert_eq!(fill_fraction(&[], 0.05, 0.05), 0.0);
    }

    #[test]
    fn reflection_defect_detects_asymmetry() {
        assert_eq!(reflection_defect(&[-0.5, 0.0, 0.5], 0.1), 0.0);
        assert!((reflection_defect(&[-0.5, 0.8], 0.1) - 0.3).abs() < 1e-15);
        assert_eq!(reflection_defect(&[0.05, 0.01], 0.1), 0.0);
    }

    #[test]
    fn multiset_pairing() {
        assert_eq!(multiset_distance(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]), 0.0);
        assert!((multiset_distance(&[0.25, 0.25, 0.125], &[0.2501, 0.1249, 0.2499]) - 1e-4).abs() < 1e-12);
        assert_eq!(multiset_distance(&[1.0], &[1.0, 2.0]), f64::INFINITY);
    }

    #[test]
    fn slope_of_power_law() {
        let rows: Vec<(f64, f64)> = [100.0, 200.0, 400.0].iter().map(|&n: &f64| (n, 3.0 / (n * n))).collect();
        assert!((log_log_slope(&rows).unwrap() + 2.0).abs() < 1e-12);
        assert!(log_log_slope(&rows[..1]).is_none());
    }

    #[test]
    fn fiber_blocks_of_kron_sum() {
        let t1 = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let l = FiberOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let s = kron_sum(&t1, &l).unwrap();
        let fb = fiber_blocks(s.matrix(), &l);
        assert!(fb.coupling < 1e-14);
        let mut from_blocks = block_spectrum(&fb).unwrap();
        from_blocks.sort_by(f64::total_cmp);
        let direct = eigh(s.matrix()).unwrap();
        for (a, b) in from_blocks.iter().zip(direct.eigenvalues().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((block_spectral_norm(&fb).unwrap() - direct.max_eigenvalue()).abs() < 1e-12);
    }

    #[test]
    fn gaps() {
        assert!((largest_gap(&[-0.5, 0.0, 0.6], -0.9, 0.9) - 0.6).abs() < 1e-15);
        assert!((largest_gap(&[], -0.9, 0.9) - 1.8).abs() < 1e-15);
    }
}
