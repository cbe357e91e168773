use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::ManyBodyState;
use crate::linalg;
use crate::model::BoseHubbardModel;

// Basis states per parallel work item; fixed so reductions are reproducible.
const CHUNK: usize = 4096;

/// One-body reduced density matrix, entry `(i, j) = ⟨a†_i a_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyRDM {
    matrix: DMatrix<Complex64>,
    n_atoms: usize,
}

impl OneBodyRDM {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_sites(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Builds an RDM directly from a matrix, e.g. for analytic reference forms.
    pub fn from_matrix(matrix: DMatrix<Complex64>, n_atoms: usize) -> Self {
        Self { matrix, n_atoms }
    }
}

/// Natural occupations, largest first, and the condensate fraction `n_1 / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpectrum {
    pub occupations: Vec<f64>,
    pub condensate_fraction: f64,
}

/// Exact contraction of `⟨a†_i a_j⟩` over the Fock basis.
pub fn one_body_rdm(state: &ManyBodyState) -> OneBodyRDM {
    let basis = state.basis();
    let m = basis.n_sites();
    let psi = state.amplitudes();

    let partials: Vec<Vec<Complex64>> = psi
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, amps)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); m * m];
            let mut moved = vec![0u16; m];
            for (offset, amp) in amps.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let occ = basis.occupation(chunk * CHUNK + offset);
                for i in 0..m {
                    acc[i * m + i] += amp.norm_sqr() * occ[i] as f64;
                }
                // upper triangle only: ⟨occ'|a†_i a_j|occ⟩ with i < j
                for j in 1..m {
                    if occ[j] == 0 {
                        continue;
                    }
                    for i in 0..j {
                        moved.copy_from_slice(occ);
                        moved[j] -= 1;
                        moved[i] += 1;
                        let target = basis.rank(&moved);
                        let factor = ((occ[j] as f64) * (occ[i] as f64 + 1.0)).sqrt();
                        acc[i * m + j] += psi[target].conj() * amp * factor;
                    }
                }
            }
            acc
        })
        .collect();

    let mut total = vec![Complex64::new(0.0, 0.0); m * m];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        matrix[(i, i)] = Complex64::new(total[i * m + i].re, 0.0);
        for j in i + 1..m {
            matrix[(i, j)] = total[i * m + j];
            matrix[(j, i)] = total[i * m + j].conj();
        }
    }
    OneBodyRDM { matrix, n_atoms: basis.n_atoms() }
}

/// Eigenvalues of the RDM sorted descending and the condensate fraction.
pub fn natural_spectrum(rdm: &OneBodyRDM) -> NaturalSpectrum {
    let (mut occupations, _) = linalg::hermitian_eigen(rdm.matrix());
    occupations.reverse();
    let condensate_fraction = occupations[0] / rdm.n_atoms as f64;
    NaturalSpectrum { occupations, condensate_fraction }
}

/// `⟨n_i⟩` for every site.
pub fn site_densities(state: &ManyBodyState) -> Vec<f64> {
    let basis = state.basis();
    let m = basis.n_sites();
    let partials: Vec<Vec<f64>> = state
        .amplitudes()
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, amps)| {
            let mut acc = vec![0.0; m];
            for (offset, amp) in amps.iter().enumerate() {
                let p = amp.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                for (a, &n) in acc.iter_mut().zip(basis.occupation(chunk * CHUNK + offset)) {
                    *a += p * n as f64;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Site coordinates in units of the lattice constant, centered on zero.
pub fn centered_sites(n_sites: usize) -> Vec<f64> {
    let center = (n_sites as f64 - 1.0) / 2.0;
    (0..n_sites).map(|i| i as f64 - center).collect()
}

/// Mean atom position `(1/N) Σ_i x_i ⟨n_i⟩` in units of the lattice constant.
pub fn mean_position(state: &ManyBodyState) -> f64 {
    mean_position_from_densities(&site_densities(state))
}

pub fn mean_position_from_densities(densities: &[f64]) -> f64 {
    let total: f64 = densities.iter().sum();
    centered_sites(densities.len()).iter().zip(densities).map(|(x, n)| x * n).sum::<f64>() / total
}

/// Nearest-neighbour particle current summed over the model's bonds.
///
/// For a bond `(i, j)` the contribution is the rate at which atoms move from
/// `i` to `j`, `2 J a Im⟨a†_i a_j⟩ / ħ`, so the total is positive when atoms
/// drift towards larger `x`. On an open chain it satisfies
/// `d⟨x⟩/dt = ⟨Ĵ⟩ / N`.
pub fn current_expectation(state: &ManyBodyState, model: &BoseHubbardModel) -> f64 {
    current_from_rdm(&one_body_rdm(state), model)
}

pub fn current_from_rdm(rdm: &OneBodyRDM, model: &BoseHubbardModel) -> f64 {
    let rho = rdm.matrix();
    let scale = 2.0 * model.hop_j * model.lattice_constant;
    model.bonds(rdm.n_sites()).iter().map(|&(i, j)| scale * rho[(i, j)].im).sum()
}
