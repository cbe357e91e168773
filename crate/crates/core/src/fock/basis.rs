use crate::{Error, Result};

/// Largest Fock-space dimension built unless a caller raises the cap.
pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

/// Occupation-number basis for a fixed number of bosons on a chain of sites.
///
/// States are stored in descending lexicographic order, so for two atoms on
/// two sites the order is `|20⟩, |11⟩, |02⟩`. The position of an occupation
/// vector is recovered in `O(n_sites)` through the combinatorial number
/// system rather than a hash map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_atoms: usize,
    n_sites: usize,
    occupations: Vec<u16>,
    // ways[n * (n_sites + 1) + m]: placements of n atoms on m sites
    ways: Vec<usize>,
}

/// Number of ways to place `n_atoms` bosons on `n_sites` sites, saturating.
pub fn fock_dimension(n_atoms: usize, n_sites: usize) -> u128 {
    if n_sites == 0 {
        return u128::from(n_atoms == 0);
    }
    // binomial(n_atoms + n_sites - 1, n_sites - 1), built incrementally so the
    // intermediate stays an exact integer.
    let k = (n_sites - 1).min(n_atoms) as u128;
    let top = (n_atoms + n_sites - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl FockBasis {
    pub fn new(n_atoms: usize, n_sites: usize) -> Result<Self> {
        Self::with_cap(n_atoms, n_sites, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(n_atoms: usize, n_sites: usize, cap: usize) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::InvalidBasis("at least one atom is required".into()));
        }
        if n_sites < 2 {
            return Err(Error::InvalidBasis("at least two sites are required".into()));
        }
        if n_atoms > u16::MAX as usize {
            return Err(Error::InvalidBasis(format!("{n_atoms} atoms exceed the u16 occupation range")));
        }
        let dimension = fock_dimension(n_atoms, n_sites);
        if dimension > cap as u128 {
            return Err(Error::DimensionOverflow { n_atoms, n_sites, dimension, cap });
        }
        let dim = dimension as usize;

        let stride = n_sites + 1;
        let mut ways = vec![0usize; (n_atoms + 1) * stride];
        for n in 0..=n_atoms {
            for m in 0..=n_sites {
                ways[n * stride + m] = fock_dimension(n, m) as usize;
            }
        }

        let mut occupations = Vec::with_capacity(dim * n_sites);
        let mut occ = vec![0u16; n_sites];
        occ[0] = n_atoms as u16;
        loop {
            occupations.extend_from_slice(&occ);
            // rightmost site (excluding the last) that can give up an atom
            let Some(i) = (0..n_sites - 1).rev().find(|&i| occ[i] > 0) else {
                break;
            };
            let tail: u16 = occ[i + 1..].iter().sum();
            occ[i] -= 1;
            occ[i + 1] = tail + 1;
            for o in &mut occ[i + 2..] {
                *o = 0;
            }
        }
        debug_assert_eq!(occupations.len(), dim * n_sites);

        Ok(Self { n_atoms, n_sites, occupations, ways })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.occupations.len() / self.n_sites
    }

    /// Occupation vector of basis state `index`.
    pub fn occupation(&self, index: usize) -> &[u16] {
        &self.occupations[index * self.n_sites..(index + 1) * self.n_sites]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        self.occupations.chunks_exact(self.n_sites)
    }

    /// Position of an occupation vector, or `None` if it is not in the basis.
    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        if occupation.len() != self.n_sites {
            return None;
        }
        let total: usize = occupation.iter().map(|&n| n as usize).sum();
        if total != self.n_atoms {
            return None;
        }
        Some(self.rank(occupation))
    }

    /// Rank of an occupation vector already known to belong to the basis.
    #[inline]
    pub(crate) fn rank(&self, occupation: &[u16]) -> usize {
        let stride = self.n_sites + 1;
        let mut remaining = self.n_atoms;
        let mut index = 0;
        for (s, &n) in occupation[..self.n_sites - 1].iter().enumerate() {
            let n = n as usize;
            if n < remaining {
                // every state with a larger occupation here comes first
                index += self.ways[(remaining - n - 1) * stride + (self.n_sites - s)];
            }
            remaining -= n;
        }
        index
    }

    pub(crate) fn same_space(&self, other: &FockBasis) -> bool {
        self.n_atoms == other.n_atoms && self.n_sites == other.n_sites
    }
}

/// Builds the basis for `n_atoms` bosons on `n_sites` sites with the default cap.
pub fn build_basis(n_atoms: usize, n_sites: usize) -> Result<FockBasis> {
    FockBasis::new(n_atoms, n_sites)
}
