use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis request: {0}")]
    InvalidBasis(String),

    #[error(
        "Fock space for {n_atoms} atoms on {n_sites} sites has dimension {dimension}, \
         above the cap of {cap}; this run needs a bigger machine"
    )]
    DimensionOverflow {
        n_atoms: usize,
        n_sites: usize,
        /// Saturates at `u128::MAX`.
        dimension: u128,
        cap: usize,
    },

    #[error("filling {filling:?} does not describe {n_atoms} atoms on {n_sites} sites")]
    FillingMismatch { filling: Vec<usize>, n_atoms: usize, n_sites: usize },

    #[error("states live in different Fock bases")]
    BasisMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },

    #[error("propagator step underflow: step {step:.3e} at t = {time:.6e}")]
    StepUnderflow { step: f64, time: f64 },

    #[error("band identification failed: {0}")]
    BandIdentification(String),

    #[error("no oscillation peak in the spectrum (signal is flat or non-oscillatory)")]
    NoPeak,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("calibration points are not separated: amp_sf = {amp_sf}, amp_mi = {amp_mi}")]
    CalibrationNotSeparated { amp_sf: f64, amp_mi: f64 },

    #[error("coupling q*Gamma*a must be positive, got {0}")]
    ZeroCoupling(f64),

    #[error("oscillation period diverges at ka = {0}")]
    DivergentPeriod(f64),
}
