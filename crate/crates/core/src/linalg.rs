//! Small dense and vector kernels shared by the solvers.
//!
//! Reductions over long vectors are split into fixed-size chunks and the
//! partial sums are combined in order, so results do not depend on the
//! number of worker threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 8192;
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let kernel =
        |(x, y): (&[Complex64], &[Complex64])| -> Complex64 { x.iter().zip(y).map(|(p, q)| p.conj() * q).sum() };
    if a.len() < PARALLEL_THRESHOLD {
        return a.chunks(CHUNK).zip(b.chunks(CHUNK)).map(kernel).sum();
    }
    let partials: Vec<Complex64> = a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(kernel).collect();
    partials.into_iter().sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    let kernel = |x: &[Complex64]| -> f64 { x.iter().map(|p| p.norm_sqr()).sum() };
    let sq: f64 = if a.len() < PARALLEL_THRESHOLD {
        a.chunks(CHUNK).map(kernel).sum()
    } else {
        let partials: Vec<f64> = a.par_chunks(CHUNK).map(kernel).collect();
        partials.into_iter().sum()
    };
    sq.sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    if y.len() < PARALLEL_THRESHOLD {
        y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
    } else {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
    }
}

pub fn scale(alpha: f64, x: &mut [Complex64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix given by its
/// diagonal and off-diagonal, eigenvalues ascending.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = diag.len();
    debug_assert!(off.len() + 1 >= n);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = diag[i];
        if i + 1 < n {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Replaces an exactly vanishing pivot in an LDLᵀ sweep.
#[inline]
fn guard_pivot(p: f64, scale: f64) -> f64 {
    if p == 0.0 {
        -f64::EPSILON * scale.max(f64::MIN_POSITIVE)
    } else {
        p
    }
}

/// Number of eigenvalues below `shift` of the symmetric tridiagonal matrix
/// (Sturm count through the inertia of `T - shift`).
pub fn tridiagonal_count_below(diag: &[f64], off: &[f64], shift: f64) -> usize {
    let scale = diag.iter().chain(off).fold(shift.abs(), |m, v| m.max(v.abs()));
    let mut count = 0;
    let mut pivot = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / pivot };
        pivot = guard_pivot(d - shift - coupling, scale);
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sturm count for a periodic ("cyclic") symmetric tridiagonal matrix whose
/// first and last rows are also coupled by `corner`. Requires `n >= 3`.
///
/// Gaussian elimination without pivoting is a congruence, so the number of
/// negative pivots equals the number of eigenvalues below `shift`. The last
/// column fills in during the sweep and is carried along.
pub fn cyclic_tridiagonal_count_below(diag: &[f64], off: &[f64], corner: f64, shift: f64) -> usize {
    let n = diag.len();
    assert!(n >= 3, "cyclic Sturm count needs at least three rows");
    let scale = diag.iter().chain(off).fold(shift.abs().max(corner.abs()), |m, v| m.max(v.abs()));
    let mut count = 0;
    // pivot of row i and the coupling of row i to the last row
    let mut pivot = guard_pivot(diag[0] - shift, scale);
    let mut last_col = corner;
    let mut last_diag = diag[n - 1] - shift;
    if pivot < 0.0 {
        count += 1;
    }
    for i in 0..n - 2 {
        // eliminate row i from row i + 1 and from the last row
        last_diag -= last_col * last_col / pivot;
        let next_last_col = if i + 1 == n - 2 { off[n - 2] } else { 0.0 } - off[i] * last_col / pivot;
        let next_pivot = guard_pivot(diag[i + 1] - shift - off[i] * off[i] / pivot, scale);
        pivot = next_pivot;
        last_col = next_last_col;
        if pivot < 0.0 {
            count += 1;
        }
    }
    last_diag -= last_col * last_col / pivot;
    if guard_pivot(last_diag, scale) < 0.0 {
        count += 1;
    }
    count
}

/// Lowest `n_levels` eigenvalues by bisection on a Sturm count.
///
/// `count_below(e)` must return the number of eigenvalues strictly below `e`
/// and all eigenvalues must lie in `[lower, upper]`. Levels are bisected
/// independently and concurrently.
pub fn bisect_lowest<F>(count_below: F, n_levels: usize, lower: f64, upper: f64) -> Vec<f64>
where
    F: Fn(f64) -> usize + Sync,
{
    (0..n_levels).into_par_iter().map(|k| bisect_level(&count_below, k, lower, upper)).collect()
}

/// The `k`-th (0-based) eigenvalue: the smallest `e` with `count_below(e) > k`.
pub fn bisect_level<F>(count_below: &F, k: usize, lower: f64, upper: f64) -> f64
where
    F: Fn(f64) -> usize,
{
    let width = (upper - lower).abs().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (lower, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * (mid.abs() + width * 1e-3) {
            break;
        }
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gershgorin interval containing every eigenvalue of a (cyclic) tridiagonal matrix.
pub fn gershgorin_tridiagonal(diag: &[f64], off: &[f64], corner: f64) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        if i == 0 || i + 1 == n {
            r += corner.abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_sturm_matches_dense() {
        let diag = [2.0, -1.0, 0.5, 3.0, 1.5, -2.0];
        let off = [1.0, 0.3, -0.7, 0.2, 1.1];
        let (dense, _) = tridiagonal_eigen(&diag, &off);
        let (lo, hi) = gershgorin_tridiagonal(&diag, &off, 0.0);
        let bis = bisect_lowest(|e| tridiagonal_count_below(&diag, &off, e), 6, lo, hi);
        for (a, b) in dense.iter().zip(&bis) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn cyclic_sturm_matches_dense() {
        let diag = [2.0, -1.0, 0.5, 3.0, 1.5, -2.0, 0.1];
        let off = [1.0, 0.3, -0.7, 0.2, 1.1, -0.4];
        let corner = 0.9;
        let n = diag.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        m[(0, n - 1)] = corner;
        m[(n - 1, 0)] = corner;
        let mut dense: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let (lo, hi) = gershgorin_tridiagonal(&diag, &off, corner);
        let bis = bisect_lowest(|e| cyclic_tridiagonal_count_below(&diag, &off, corner, e), n, lo, hi);
        for (a, b) in dense.iter().zip(&bis) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hermitian_eigen_sorted() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)],
        );
        let (vals, _) = hermitian_eigen(&m);
        assert!((vals[0] - 0.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dot_and_norm() {
        let a = vec![Complex64::new(1.0, 1.0); 40_000];
        assert!((norm(&a) - (80_000f64).sqrt()).abs() < 1e-9);
        assert_eq!(dot(&a, &a), Complex64::new(80_000.0, 0.0));
    }
}
