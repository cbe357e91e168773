//! Bose-Hubbard Hamiltonian with an optional linear tilt.
//!
//! ```text
//! H = -J Σ_<ij> (a†_j a_i + h.c.) + (U/2) Σ_i n_i (n_i - 1) + Σ_i (ε_i + γ x_i) n_i
//! ```
//!
//! with centered site coordinates `x_i = (i - (M-1)/2) a`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fock::{centered_sites, FockBasis};
use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    /// Adds the bond between the last and first site (for three or more sites).
    Periodic,
}

/// Parameters of the discrete lattice model. The site count comes from the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoseHubbardModel {
    pub hop_j: f64,
    pub onsite_u: f64,
    /// Empty means all zero; otherwise one entry per site.
    pub site_energies: Vec<f64>,
    /// Energy per unit length.
    pub tilt_gamma: f64,
    pub lattice_constant: f64,
    pub boundary: Boundary,
}

impl BoseHubbardModel {
    /// Open chain with unit lattice constant and no tilt.
    pub fn new(hop_j: f64, onsite_u: f64) -> Self {
        Self {
            hop_j,
            onsite_u,
            site_energies: Vec::new(),
            tilt_gamma: 0.0,
            lattice_constant: 1.0,
            boundary: Boundary::Open,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_onsite_u(mut self, onsite_u: f64) -> Self {
        self.onsite_u = onsite_u;
        self
    }

    pub fn with_tilt(mut self, tilt_gamma: f64) -> Self {
        self.tilt_gamma = tilt_gamma;
        self
    }

    pub fn with_site_energies(mut self, site_energies: Vec<f64>) -> Self {
        self.site_energies = site_energies;
        self
    }

    pub fn with_lattice_constant(mut self, a: f64) -> Self {
        self.lattice_constant = a;
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let finite = [self.hop_j, self.onsite_u, self.tilt_gamma, self.lattice_constant]
            .iter()
            .chain(&self.site_energies)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.hop_j < 0.0 {
            return Err(Error::InvalidParameter(format!("hop_J must be >= 0, got {}", self.hop_j)));
        }
        if self.lattice_constant <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lattice constant must be > 0, got {}",
                self.lattice_constant
            )));
        }
        if !self.site_energies.is_empty() && self.site_energies.len() != n_sites {
            return Err(Error::DimensionMismatch { expected: n_sites, found: self.site_energies.len() });
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, i + 1)`, plus `(M - 1, 0)` on a ring.
    pub fn bonds(&self, n_sites: usize) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n_sites > 2 {
            bonds.push((n_sites - 1, 0));
        }
        bonds
    }

    /// Site coordinates in length units, centered on zero.
    pub fn site_positions(&self, n_sites: usize) -> Vec<f64> {
        centered_sites(n_sites).into_iter().map(|x| x * self.lattice_constant).collect()
    }

    /// Single-particle potential `ε_i + γ x_i`.
    pub fn site_potential(&self, n_sites: usize) -> Vec<f64> {
        self.site_positions(n_sites)
            .iter()
            .enumerate()
            .map(|(i, x)| self.site_energies.get(i).copied().unwrap_or(0.0) + self.tilt_gamma * x)
            .collect()
    }
}

/// Hermitian operator in compressed sparse row form.
///
/// Rows are in basis order and columns ascend within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseHamiltonian {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self { dim, row_ptr, cols, values })
    }

    fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, values }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, col, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k])))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(Complex64::new(0.0, 0.0), |k| self.values[k])
            })
            .collect()
    }

    /// Largest deviation `|H_rc - conj(H_cr)|` over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Max absolute row sum, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = H x` into a preallocated buffer.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: y.len() });
        }
        let row = |r: usize| -> Complex64 {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k] * x[self.cols[k]]).sum()
        };
        if self.dim < 4096 {
            y.iter_mut().enumerate().for_each(|(r, yr)| *yr = row(r));
        } else {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row(r));
        }
        Ok(())
    }

    /// `⟨v|H|v⟩` (real for Hermitian `H`).
    pub fn expectation(&self, v: &[Complex64]) -> Result<f64> {
        let hv = apply_hamiltonian(self, v)?;
        Ok(linalg::dot(v, &hv).re)
    }
}

/// Builds the number-conserving Bose-Hubbard operator on `basis`.
pub fn build_hamiltonian(basis: &FockBasis, model: &BoseHubbardModel) -> Result<SparseHamiltonian> {
    let m = basis.n_sites();
    model.validate(m)?;
    let bonds = model.bonds(m);
    let potential = model.site_potential(m);
    let half_u = 0.5 * model.onsite_u;

    let rows: Vec<Vec<(usize, Complex64)>> = (0..basis.dimension())
        .into_par_iter()
        .map(|r| {
            let occ = basis.occupation(r);
            let mut moved = occ.to_vec();
            let mut row: Vec<(usize, Complex64)> = Vec::with_capacity(2 * bonds.len() + 1);
            let diag: f64 = occ
                .iter()
                .zip(&potential)
                .map(|(&n, v)| {
                    let n = n as f64;
                    half_u * n * (n - 1.0) + v * n
                })
                .sum();
            row.push((r, Complex64::new(diag, 0.0)));
            if model.hop_j != 0.0 {
                for &(i, j) in &bonds {
                    // ⟨r| a†_p a_q |s⟩ with s = r - e_p + e_q, for both hop directions
                    for (p, q) in [(i, j), (j, i)] {
                        if occ[p] == 0 {
                            continue;
                        }
                        moved.copy_from_slice(occ);
                        moved[p] -= 1;
                        moved[q] += 1;
                        let col = basis.rank(&moved);
                        let amp = -model.hop_j * ((occ[p] as f64) * (occ[q] as f64 + 1.0)).sqrt();
                        row.push((col, Complex64::new(amp, 0.0)));
                    }
                }
            }
            row.sort_by_key(|&(c, _)| c);
            // merge coincident columns (ring of three sites can revisit a state)
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged
        })
        .collect();
    Ok(SparseHamiltonian::from_rows(rows))
}

/// `H v`.
pub fn apply_hamiltonian(h: &SparseHamiltonian, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut y = vec![Complex64::new(0.0, 0.0); h.dimension()];
    h.apply_into(v, &mut y)?;
    Ok(y)
}
