//! Gradiometer calculators in SI units.
//!
//! A lattice tilted by `θ` in a field gradient `Γ` picks up the potential
//! `qΓz`; holding it for `T` imprints the neighbour phase
//! `Δφ = qΓ a sin(θ) T / ħ`. The scheme only senses gradients along the
//! lattice, i.e. horizontal gradients for a horizontal lattice.
//!
//! Constants are CODATA 2018 values.

use std::f64::consts::PI;

use crate::analysis::tb_frequency;
use crate::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const MASS_RB87: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;
pub const MASS_CR52: f64 = 51.940_507_5 * ATOMIC_MASS_UNIT;
/// Standard gravity rounded as used for the rubidium estimate, m/s².
pub const GRAVITY: f64 = 9.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradiometerParams {
    /// Coupling charge: mass (kg) for gravity, magnetic moment (J/T) for a
    /// magnetic gradient.
    pub charge: f64,
    /// Acceleration (m/s²) or field gradient (T/m).
    pub gradient: f64,
    /// m.
    pub lattice_constant: f64,
    /// rad, in `[0, π/2]`.
    pub tilt_angle: f64,
    /// s.
    pub tilt_time: f64,
    pub hbar: f64,
}

impl GradiometerParams {
    pub fn new(charge: f64, gradient: f64, lattice_constant: f64) -> Self {
        Self { charge, gradient, lattice_constant, tilt_angle: PI / 2.0, tilt_time: 0.0, hbar: HBAR }
    }

    pub fn with_tilt(mut self, tilt_angle: f64, tilt_time: f64) -> Self {
        self.tilt_angle = tilt_angle;
        self.tilt_time = tilt_time;
        self
    }

    /// Gravity acting on a ⁸⁷Rb atom.
    pub fn rb87_gravity(gradient: f64, lattice_constant: f64) -> Self {
        Self::new(MASS_RB87, gradient, lattice_constant)
    }

    /// Magnetic gradient acting on ⁵²Cr (6 μ_B).
    pub fn cr52_magnetic(gradient: f64, lattice_constant: f64) -> Self {
        Self::new(6.0 * BOHR_MAGNETON, gradient, lattice_constant)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.charge, self.gradient, self.lattice_constant, self.tilt_angle, self.tilt_time, self.hbar]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("gradiometer parameters must be finite".into()));
        }
        if !(self.lattice_constant > 0.0) || !(self.hbar > 0.0) {
            return Err(Error::InvalidParameter("lattice constant and hbar must be > 0".into()));
        }
        if self.tilt_time < 0.0 {
            return Err(Error::InvalidParameter(format!("tilt time must be >= 0, got {}", self.tilt_time)));
        }
        if !(0.0..=PI / 2.0).contains(&self.tilt_angle) {
            return Err(Error::InvalidParameter(format!("tilt angle must lie in [0, π/2], got {}", self.tilt_angle)));
        }
        Ok(())
    }

    /// `qΓa`, the force-times-length scale of the coupling.
    fn coupling(&self) -> f64 {
        self.charge * self.gradient * self.lattice_constant
    }
}

/// `Δφ = qΓ a sin(θ) T / ħ`.
pub fn gradiometer_phase(p: &GradiometerParams) -> Result<f64> {
    p.validate()?;
    Ok(p.coupling() * p.tilt_angle.sin() * p.tilt_time / p.hbar)
}

/// `sin(θ)·T` needed for the neighbour phase `target_phase`; `θ` and `T` of
/// `p` are ignored.
pub fn required_tilt_product(p: &GradiometerParams, target_phase: f64) -> Result<f64> {
    p.validate()?;
    let coupling = p.coupling();
    if !(coupling > 0.0) {
        return Err(Error::ZeroCoupling(coupling));
    }
    if !target_phase.is_finite() {
        return Err(Error::InvalidParameter("target phase must be finite".into()));
    }
    Ok(target_phase * p.hbar / coupling)
}

/// Period `2π/ω` of the boost oscillation on an `n_sites` chain with
/// tunneling energy `hop_j` (J) at wavevector `ka`.
pub fn oscillation_period_estimate(hop_j: f64, n_sites: usize, ka: f64) -> Result<f64> {
    let omega = tb_frequency(ka, hop_j / HBAR, n_sites)?.abs();
    if omega < 1e-12 * (hop_j / HBAR).abs() || omega == 0.0 {
        return Err(Error::DivergentPeriod(ka));
    }
    Ok(2.0 * PI / omega)
}
