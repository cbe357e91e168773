use std::sync::Arc;

use num_complex::Complex64;

use super::FockBasis;
use crate::linalg;
use crate::{Error, Result};

/// Norm tolerance for states built from caller-supplied amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Normalized amplitude vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl ManyBodyState {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&basis, &amplitudes)?;
        let norm = linalg::norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { basis, amplitudes, time: 0.0 })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(basis: Arc<FockBasis>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&basis, &amplitudes)?;
        let norm = linalg::norm(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { basis, amplitudes, time: 0.0 })
    }

    /// For propagated vectors whose norm is controlled by the integrator.
    pub(crate) fn from_parts(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>, time: f64) -> Self {
        debug_assert_eq!(basis.dimension(), amplitudes.len());
        Self { basis, amplitudes, time }
    }

    /// A single occupation-number state.
    pub fn fock(basis: Arc<FockBasis>, occupation: &[usize]) -> Result<Self> {
        let mismatch = || Error::FillingMismatch {
            filling: occupation.to_vec(),
            n_atoms: basis.n_atoms(),
            n_sites: basis.n_sites(),
        };
        if occupation.len() != basis.n_sites() || occupation.iter().any(|&n| n > u16::MAX as usize) {
            return Err(mismatch());
        }
        let occ: Vec<u16> = occupation.iter().map(|&n| n as u16).collect();
        let index = basis.index_of(&occ).ok_or_else(mismatch)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes, time: 0.0 })
    }

    /// All atoms in one single-particle orbital: `(Σ_i c_i a†_i)^N |0⟩`, normalized.
    ///
    /// The orbital is normalized internally.
    pub fn condensate(basis: Arc<FockBasis>, orbital: &[Complex64]) -> Result<Self> {
        if orbital.len() != basis.n_sites() {
            return Err(Error::DimensionMismatch { expected: basis.n_sites(), found: orbital.len() });
        }
        let norm = linalg::norm(orbital);
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("orbital must be nonzero".into()));
        }
        let orbital: Vec<Complex64> = orbital.iter().map(|c| c / norm).collect();
        let ln_fact = ln_factorials(basis.n_atoms());
        let ln_n_fact = ln_fact[basis.n_atoms()];
        let amplitudes = basis
            .iter()
            .map(|occ| {
                // sqrt(N! / Π n_i!) Π c_i^{n_i}
                let ln_weight = ln_n_fact - occ.iter().map(|&n| ln_fact[n as usize]).sum::<f64>();
                let product: Complex64 =
                    occ.iter().zip(&orbital).filter(|(&n, _)| n > 0).map(|(&n, c)| c.powi(n as i32)).product();
                product * (0.5 * ln_weight).exp()
            })
            .collect();
        Self::normalized(basis, amplitudes)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &ManyBodyState) -> Result<Complex64> {
        if !self.basis.same_space(&other.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(linalg::dot(&self.amplitudes, &other.amplitudes))
    }
}

fn check_len(basis: &FockBasis, amplitudes: &[Complex64]) -> Result<()> {
    if amplitudes.len() != basis.dimension() {
        return Err(Error::DimensionMismatch { expected: basis.dimension(), found: amplitudes.len() });
    }
    Ok(())
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Uniform superfluid `(Σ_i a†_i)^N |0⟩`, normalized.
pub fn make_superfluid_state(basis: Arc<FockBasis>) -> Result<ManyBodyState> {
    let orbital = vec![Complex64::new(1.0, 0.0); basis.n_sites()];
    ManyBodyState::condensate(basis, &orbital)
}

/// Atomic-limit Mott state: the single Fock state `Π_i (a†_i)^{f_i} |0⟩`.
pub fn make_mott_state(basis: Arc<FockBasis>, filling: &[usize]) -> Result<ManyBodyState> {
    ManyBodyState::fock(basis, filling)
}

/// `|⟨a|b⟩|`.
pub fn state_fidelity(a: &ManyBodyState, b: &ManyBodyState) -> Result<f64> {
    Ok(a.overlap(b)?.norm())
}
