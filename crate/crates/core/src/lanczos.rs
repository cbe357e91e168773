//! Restarted Lanczos iteration for the lowest eigenpair of a sparse
//! Hermitian operator.
//!
//! Each cycle builds a Krylov basis with full reorthogonalization, takes the
//! lowest Ritz pair and restarts from the Ritz vector until the true residual
//! `‖Hv - λv‖` falls below the tolerance. When the Krylov dimension reaches
//! the Hilbert-space dimension a single cycle is exact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::model::SparseHamiltonian;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    /// Absolute bound on `‖Hv - λv‖`.
    pub tolerance: f64,
    pub max_restarts: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { krylov_dim: 80, tolerance: 1e-10, max_restarts: 500, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub restarts: usize,
}

/// Krylov basis and projected tridiagonal matrix.
pub(crate) struct KrylovBasis {
    pub vectors: Vec<Vec<Complex64>>,
    pub alpha: Vec<f64>,
    /// `beta[k]` couples vectors `k` and `k + 1`; the last entry is the
    /// residual coupling out of the subspace.
    pub beta: Vec<f64>,
    /// Set when the subspace is invariant under `H`.
    pub exhausted: bool,
}

/// Runs up to `max_dim` Lanczos steps from `start` (normalized internally).
pub(crate) fn krylov_basis(h: &SparseHamiltonian, start: &[Complex64], max_dim: usize) -> Result<KrylovBasis> {
    let dim = h.dimension();
    let max_dim = max_dim.min(dim).max(1);
    let start_norm = linalg::norm(start);
    let mut v0 = start.to_vec();
    linalg::scale(1.0 / start_norm, &mut v0);

    let breakdown = 1e-13 * h.norm_bound().max(f64::MIN_POSITIVE);
    let mut vectors = vec![v0];
    let mut alpha = Vec::with_capacity(max_dim);
    let mut beta = Vec::with_capacity(max_dim);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let k = vectors.len() - 1;
        h.apply_into(&vectors[k], &mut w)?;
        let a = linalg::dot(&vectors[k], &w).re;
        alpha.push(a);
        // full reorthogonalization, applied twice
        for _ in 0..2 {
            for v in &vectors {
                let c = linalg::dot(v, &w);
                linalg::axpy(-c, v, &mut w);
            }
        }
        let b = linalg::norm(&w);
        beta.push(b);
        if b <= breakdown {
            return Ok(KrylovBasis { vectors, alpha, beta, exhausted: true });
        }
        if vectors.len() == max_dim {
            let exhausted = vectors.len() == dim;
            return Ok(KrylovBasis { vectors, alpha, beta, exhausted });
        }
        let mut next = w.clone();
        linalg::scale(1.0 / b, &mut next);
        vectors.push(next);
    }
}

/// Deterministic start vector with strictly positive real entries.
///
/// Positive entries overlap the ground state of any hopping Hamiltonian
/// with non-positive off-diagonal elements.
pub fn start_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| Complex64::new(0.5 + rng.random::<f64>(), 0.0)).collect()
}

/// Lowest eigenpair of `h`.
pub fn lowest_eigenpair(h: &SparseHamiltonian, options: &LanczosOptions) -> Result<Eigenpair> {
    let dim = h.dimension();
    if dim == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let mut current = start_vector(dim, options.seed);
    let mut residual = f64::INFINITY;
    let mut hv = vec![Complex64::new(0.0, 0.0); dim];
    for restart in 0..=options.max_restarts {
        let basis = krylov_basis(h, &current, options.krylov_dim.max(2))?;
        let m = basis.alpha.len();
        let (values, vectors) = linalg::tridiagonal_eigen(&basis.alpha, &basis.beta[..m - 1]);
        let theta = values[0];
        let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
        for (k, v) in basis.vectors.iter().enumerate() {
            linalg::axpy(Complex64::new(vectors[(k, 0)], 0.0), v, &mut ritz);
        }
        let n = linalg::norm(&ritz);
        linalg::scale(1.0 / n, &mut ritz);

        h.apply_into(&ritz, &mut hv)?;
        let value = linalg::dot(&ritz, &hv).re;
        linalg::axpy(Complex64::new(-value, 0.0), &ritz, &mut hv);
        residual = linalg::norm(&hv);
        log::trace!("lanczos restart {restart}: theta = {theta:.15e}, residual = {residual:.3e}");
        if residual <= options.tolerance {
            return Ok(Eigenpair { value, vector: ritz, residual, restarts: restart });
        }
        current = ritz;
    }
    Err(Error::NonConvergence { what: "Lanczos ground state", iterations: options.max_restarts, residual })
}
