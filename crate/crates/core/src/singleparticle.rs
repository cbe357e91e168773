//! Continuous 1D single-particle spectra in `V(x) = V0 cos²(πx/a)` and the
//! tight-binding parameters extracted from them.
//!
//! Two discretizations are available:
//!
//! * second-order central finite differences on a uniform grid (both
//!   boundary conditions), refined by grid doubling until every requested
//!   level changes by at most [`CONVERGENCE_TOLERANCE`] (relative);
//! * a plane-wave basis (periodic only). The potential couples `k` to
//!   `k ± 2π/a` only, so the Hamiltonian splits into one tridiagonal block per
//!   crystal momentum; the cutoff is doubled until converged.
//!
//! Eigenvalues come from bisection on Sturm counts, which resolves the
//! degenerate pairs of periodic spectra without special handling.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::linalg::{bisect_lowest, cyclic_tridiagonal_count_below, gershgorin_tridiagonal, tridiagonal_count_below};
use crate::{Error, Result};

pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
pub const MIN_POINTS_PER_PERIOD: usize = 16;
/// Largest finite-difference grid tried before giving up.
pub const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellBoundary {
    Periodic,
    /// Infinite walls at `x = 0` and `x = n_cells·a`, both barrier maxima.
    HardWall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    FiniteDifference,
    PlaneWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousLattice {
    pub v0: f64,
    pub period: f64,
    pub n_cells: usize,
    pub boundary: CellBoundary,
    /// Starting resolution of the finite-difference grid.
    pub points_per_period: usize,
    pub mass: f64,
    pub hbar: f64,
}

impl ContinuousLattice {
    /// `ħ = m = 1`, starting at the minimum resolution.
    pub fn new(v0: f64, period: f64, n_cells: usize, boundary: CellBoundary) -> Self {
        Self { v0, period, n_cells, boundary, points_per_period: MIN_POINTS_PER_PERIOD, mass: 1.0, hbar: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.period * self.n_cells as f64
    }

    pub fn potential(&self, x: f64) -> f64 {
        let c = (PI * x / self.period).cos();
        self.v0 * c * c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.period > 0.0) || !self.period.is_finite() {
            return bad(format!("lattice period must be > 0, got {}", self.period));
        }
        if self.n_cells == 0 {
            return bad("need at least one lattice cell".into());
        }
        if self.points_per_period < MIN_POINTS_PER_PERIOD {
            return bad(format!(
                "grid needs at least {MIN_POINTS_PER_PERIOD} points per period, got {}",
                self.points_per_period
            ));
        }
        if !(self.mass > 0.0) || !(self.hbar > 0.0) || !self.v0.is_finite() {
            return bad("mass and hbar must be > 0 and V0 finite".into());
        }
        Ok(())
    }

    /// `ħ²/(2m)`.
    fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Energies below this are compared absolutely rather than relatively.
    fn energy_floor(&self) -> f64 {
        self.kinetic_scale() / (self.length() * self.length())
    }
}

/// First-band summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BandResult {
    /// The band levels used, ascending.
    pub eigenvalues: Vec<f64>,
    /// Band center.
    pub alpha: f64,
    pub hop_j: f64,
    /// RMS deviation from the tight-binding dispersion, relative to the band width.
    pub band_fit_residual: f64,
}

/// Lowest `n_levels` eigenvalues by converged finite differences.
pub fn solve_spectrum(lat: &ContinuousLattice, n_levels: usize) -> Result<Vec<f64>> {
    solve_spectrum_with(lat, n_levels, Discretization::FiniteDifference)
}

pub fn solve_spectrum_with(lat: &ContinuousLattice, n_levels: usize, method: Discretization) -> Result<Vec<f64>> {
    lat.validate()?;
    if n_levels == 0 {
        return Ok(Vec::new());
    }
    match method {
        Discretization::FiniteDifference => {
            let first = fd_grid_size(lat, lat.points_per_period);
            if n_levels > first {
                return Err(Error::InvalidParameter(format!(
                    "{n_levels} levels requested from a grid of {first} points"
                )));
            }
            converge(lat, "finite-difference spectrum", lat.points_per_period, |ppp| {
                (fd_grid_size(lat, ppp) <= MAX_GRID_POINTS).then(|| fd_levels(lat, ppp, n_levels))
            })
        }
        Discretization::PlaneWave => {
            if lat.boundary != CellBoundary::Periodic {
                return Err(Error::InvalidParameter("plane-wave basis needs periodic boundaries".into()));
            }
            // enough harmonics per block that the blocks hold n_levels states
            let start = (n_levels / (2 * lat.n_cells) + 1).max(8);
            converge(lat, "plane-wave spectrum", start, |cutoff| {
                (cutoff * lat.n_cells <= MAX_GRID_POINTS).then(|| plane_wave_levels(lat, cutoff, n_levels))
            })
        }
    }
}

/// Finite-difference spectrum checked against the plane-wave one.
///
/// Returns the finite-difference levels and the largest relative disagreement.
/// Fails when the two disagree by more than `tolerance`.
pub fn cross_validated_spectrum(lat: &ContinuousLattice, n_levels: usize, tolerance: f64) -> Result<(Vec<f64>, f64)> {
    let fd = solve_spectrum_with(lat, n_levels, Discretization::FiniteDifference)?;
    let pw = solve_spectrum_with(lat, n_levels, Discretization::PlaneWave)?;
    let disagreement = max_relative_change(&fd, &pw, lat.energy_floor());
    if disagreement > tolerance {
        return Err(Error::NonConvergence {
            what: "finite-difference/plane-wave agreement",
            iterations: 1,
            residual: disagreement,
        });
    }
    Ok((fd, disagreement))
}

fn max_relative_change(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor)).fold(0.0, f64::max)
}

/// Doubles the resolution parameter until successive spectra agree.
fn converge<F>(lat: &ContinuousLattice, what: &'static str, start: usize, levels_at: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Option<Vec<f64>>,
{
    let floor = lat.energy_floor();
    let mut resolution = start;
    let mut previous =
        levels_at(resolution).ok_or(Error::NonConvergence { what, iterations: 0, residual: f64::NAN })?;
    let mut change = f64::INFINITY;
    for iteration in 1.. {
        resolution *= 2;
        let Some(current) = levels_at(resolution) else {
            return Err(Error::NonConvergence { what, iterations: iteration, residual: change });
        };
        change = max_relative_change(&previous, &current, floor);
        log::debug!("{what}: resolution {resolution}, relative change {change:.3e}");
        if change <= CONVERGENCE_TOLERANCE {
            return Ok(current);
        }
        previous = current;
    }
    unreachable!()
}

fn fd_grid_size(lat: &ContinuousLattice, ppp: usize) -> usize {
    let n = lat.n_cells * ppp;
    match lat.boundary {
        CellBoundary::Periodic => n,
        CellBoundary::HardWall => n - 1,
    }
}

fn fd_levels(lat: &ContinuousLattice, ppp: usize, n_levels: usize) -> Vec<f64> {
    let h = lat.period / ppp as f64;
    let t = lat.kinetic_scale() / (h * h);
    let n = fd_grid_size(lat, ppp);
    // periodic grids start on x = 0; hard-wall grids exclude both walls
    let offset = match lat.boundary {
        CellBoundary::Periodic => 0,
        CellBoundary::HardWall => 1,
    };
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * t + lat.potential((k + offset) as f64 * h)).collect();
    let off = vec![-t; n - 1];
    let n_levels = n_levels.min(n);
    match lat.boundary {
        CellBoundary::Periodic => {
            let (lo, hi) = gershgorin_tridiagonal(&diag, &off, -t);
            bisect_lowest(|e| cyclic_tridiagonal_count_below(&diag, &off, -t, e), n_levels, lo, hi)
        }
        CellBoundary::HardWall => {
            let (lo, hi) = gershgorin_tridiagonal(&diag, &off, 0.0);
            bisect_lowest(|e| tridiagonal_count_below(&diag, &off, e), n_levels, lo, hi)
        }
    }
}

/// Plane waves `k = 2π(r + j·n_cells)/L` with `|j| <= cutoff`, one
/// tridiagonal block per residue `r`.
fn plane_wave_levels(lat: &ContinuousLattice, cutoff: usize, n_levels: usize) -> Vec<f64> {
    let nc = lat.n_cells as i64;
    let k0 = 2.0 * PI / lat.length();
    let c = cutoff as i64;
    let blocks: Vec<Vec<f64>> = (0..nc)
        .map(|r| {
            // center each block on the smallest |k| of its residue class
            let shift = if 2 * r > nc { r - nc } else { r };
            (-c..=c).map(|j| lat.kinetic_scale() * (k0 * (shift + j * nc) as f64).powi(2) + 0.5 * lat.v0).collect()
        })
        .collect();
    let off = vec![0.25 * lat.v0; 2 * cutoff];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in &blocks {
        let (l, h) = gershgorin_tridiagonal(d, &off, 0.0);
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let total = blocks.len() * blocks[0].len();
    let count = |e: f64| blocks.iter().map(|d| tridiagonal_count_below(d, &off, e)).sum::<usize>();
    bisect_lowest(count, n_levels.min(total), lo, hi)
}

/// Tight-binding parameters from the first band of a periodic lattice.
///
/// `J = (E_{n-1} - E_0)/4`, `α` is the band midpoint, and the residual comes
/// from a least-squares fit of `α - 2J cos(q a)` with `q = 2πk/(n a)`. Extra
/// levels beyond `n_sites` are used to confirm the gap above the band.
pub fn tunneling_from_band(eigenvalues: &[f64], n_sites: usize) -> Result<BandResult> {
    let cosines: Vec<f64> = (0..n_sites).map(|k| -(2.0 * PI * k as f64 / n_sites as f64).cos()).collect();
    let band = first_band(eigenvalues, n_sites)?;
    let hop_j = 0.25 * (band[n_sites - 1] - band[0]);
    finish_band(band, cosines, hop_j)
}

/// Tight-binding parameters from the first band of a hard-wall lattice.
///
/// An open chain of `n` sites has `E_k = α - 2J cos(π(k+1)/(n+1))`, so its
/// band spans `4J cos(π/(n+1))` rather than `4J`.
pub fn tunneling_from_open_band(eigenvalues: &[f64], n_sites: usize) -> Result<BandResult> {
    let cosines: Vec<f64> = (0..n_sites).map(|k| -(PI * (k + 1) as f64 / (n_sites + 1) as f64).cos()).collect();
    let band = first_band(eigenvalues, n_sites)?;
    let hop_j = (band[n_sites - 1] - band[0]) / (4.0 * (PI / (n_sites + 1) as f64).cos());
    finish_band(band, cosines, hop_j)
}

fn first_band(eigenvalues: &[f64], n_sites: usize) -> Result<Vec<f64>> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter("a band needs at least two sites".into()));
    }
    if eigenvalues.len() < n_sites {
        return Err(Error::BandIdentification(format!(
            "{} eigenvalues cannot hold a band of {n_sites} levels",
            eigenvalues.len()
        )));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("eigenvalues must be ascending".into()));
    }
    if let Some(&next) = eigenvalues.get(n_sites) {
        let band = &eigenvalues[..n_sites];
        let widest = band.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let gap = next - band[n_sites - 1];
        if gap <= widest {
            return Err(Error::BandIdentification(format!(
                "gap {gap:.6e} above level {} does not exceed the in-band spacing {widest:.6e}",
                n_sites - 1
            )));
        }
    }
    Ok(eigenvalues[..n_sites].to_vec())
}

fn finish_band(band: Vec<f64>, mut cosines: Vec<f64>, hop_j: f64) -> Result<BandResult> {
    let n = band.len() as f64;
    let alpha = 0.5 * (band[0] + band[band.len() - 1]);
    // the dispersion is monotone in -cos, so sorted levels pair with sorted cosines
    cosines.sort_by(f64::total_cmp);
    let mean_c = cosines.iter().sum::<f64>() / n;
    let mean_e = band.iter().sum::<f64>() / n;
    let sxx: f64 = cosines.iter().map(|c| (c - mean_c).powi(2)).sum();
    let sxy: f64 = cosines.iter().zip(&band).map(|(c, e)| (c - mean_c) * (e - mean_e)).sum();
    let slope = sxy / sxx;
    let intercept = mean_e - slope * mean_c;
    let rms = (cosines.iter().zip(&band).map(|(c, e)| (e - intercept - slope * c).powi(2)).sum::<f64>() / n).sqrt();
    let width = band[band.len() - 1] - band[0];
    let band_fit_residual = if width > 0.0 { rms / width } else { rms };
    Ok(BandResult { eigenvalues: band, alpha, hop_j, band_fit_residual })
}

/// `E_R = h²/(2mλ²)` with `λ = 2a`.
pub fn recoil_energy(lat: &ContinuousLattice) -> f64 {
    let h = 2.0 * PI * lat.hbar;
    h * h / (2.0 * lat.mass * (2.0 * lat.period).powi(2))
}

/// Levels of several lattices, computed concurrently, in input order.
pub fn solve_spectra(lattices: &[ContinuousLattice], n_levels: usize) -> Result<Vec<Vec<f64>>> {
    lattices.par_iter().map(|l| solve_spectrum(l, n_levels)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_ring() {
        let lat = ContinuousLattice::new(0.0, 1.0, 4, CellBoundary::Periodic);
        let e = solve_spectrum(&lat, 5).unwrap();
        let unit = 0.5 * (2.0 * PI / 4.0f64).powi(2);
        let exact = [0.0, unit, unit, 4.0 * unit, 4.0 * unit];
        for (a, b) in e.iter().zip(exact) {
            assert!((a - b).abs() <= 3e-6 * b.max(unit), "{a} vs {b}");
        }
        let pw = solve_spectrum_with(&lat, 5, Discretization::PlaneWave).unwrap();
        for (a, b) in pw.iter().zip(exact) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn particle_in_a_box() {
        let lat = ContinuousLattice::new(0.0, 2.0, 3, CellBoundary::HardWall);
        let e = solve_spectrum(&lat, 4).unwrap();
        for (n, v) in e.iter().enumerate() {
            let exact = 0.5 * (PI * (n + 1) as f64 / 6.0).powi(2);
            assert!((v - exact).abs() / exact < 3e-6, "{v} vs {exact}");
        }
    }

    #[test]
    fn recoil_values() {
        let lat = ContinuousLattice::new(1.0, 1.0, 1, CellBoundary::Periodic);
        assert!((recoil_energy(&lat) - 4.934802200544679).abs() < 1e-12);
        let lat = ContinuousLattice::new(1.0, 5.0, 1, CellBoundary::Periodic);
        assert!((recoil_energy(&lat) - 0.19739208802178715).abs() < 1e-12);
    }

    #[test]
    fn synthetic_bands_round_trip() {
        let (alpha, j) = (1.3, 0.27);
        let n = 12;
        let mut ring: Vec<f64> = (0..n).map(|k| alpha - 2.0 * j * (2.0 * PI * k as f64 / n as f64).cos()).collect();
        ring.sort_by(f64::total_cmp);
        let r = tunneling_from_band(&ring, n).unwrap();
        assert!((r.hop_j - j).abs() < 1e-12 && (r.alpha - alpha).abs() < 1e-12);
        assert!(r.band_fit_residual < 1e-12);

        let open: Vec<f64> = (0..n).map(|k| alpha - 2.0 * j * (PI * (k + 1) as f64 / (n + 1) as f64).cos()).collect();
        let r = tunneling_from_open_band(&open, n).unwrap();
        assert!((r.hop_j - j).abs() < 1e-12);
        assert!(r.band_fit_residual < 1e-12);
    }

    #[test]
    fn gapless_spectrum_is_rejected() {
        let lat = ContinuousLattice::new(0.0, 1.0, 4, CellBoundary::Periodic);
        let e = solve_spectrum_with(&lat, 6, Discretization::PlaneWave).unwrap();
        assert!(matches!(tunneling_from_band(&e, 4), Err(Error::BandIdentification(_))));
        assert!(tunneling_from_band(&e[..3], 4).is_err());
    }

    #[test]
    fn rejects_coarse_grid_and_open_plane_waves() {
        let mut lat = ContinuousLattice::new(1.0, 1.0, 2, CellBoundary::HardWall);
        assert!(solve_spectrum_with(&lat, 2, Discretization::PlaneWave).is_err());
        lat.points_per_period = 8;
        assert!(solve_spectrum(&lat, 2).is_err());
    }
}
