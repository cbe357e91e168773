//! Exact-diagonalization toolkit for probing the condensate fraction of
//! bosons in one-dimensional lattices with momentum boosts.
//!
//! A boost (phase imprint or brief lattice tilt) induces a lattice-wide
//! current whose size tracks the phase coherence between sites. The crate
//! prepares Bose-Hubbard states, boosts and propagates them, and extracts the
//! observables that connect oscillation amplitude to condensate fraction:
//!
//! - [`fock`]: occupation basis, many-body states, one-body density matrix,
//!   natural occupations, densities, position and current.
//! - [`model`]: Bose-Hubbard Hamiltonian with optional tilt as a sparse operator.
//! - [`dynamics`]: ground states, boosts, Krylov propagation, quench runs.
//! - [`singleparticle`]: continuous lattice spectra and tunneling extraction.
//! - [`analysis`]: smoothing, amplitude/frequency extraction, linear fits.
//! - [`metrology`]: gradiometer phase and timing estimates in SI units.
//!
//! Lattice-side quantities use units with ħ = 1: energies are angular
//! frequencies and times are the conjugate unit. Metrology uses SI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
mod error;
pub mod fock;
pub mod krylov;
pub mod lanczos;
pub mod linalg;
pub mod metrology;
pub mod model;
pub mod singleparticle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
