//! Occupation-number basis, many-body states and their static observables.

mod basis;
mod observables;
mod state;

pub use basis::{build_basis, fock_dimension, FockBasis, DEFAULT_DIMENSION_CAP};
pub use observables::{
    centered_sites, current_expectation, current_from_rdm, mean_position, mean_position_from_densities,
    natural_spectrum, one_body_rdm, site_densities, NaturalSpectrum, OneBodyRDM,
};
pub use state::{make_mott_state, make_superfluid_state, state_fidelity, ManyBodyState, NORM_TOLERANCE};
