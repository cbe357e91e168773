//! Ground states, momentum boosts and real-time quench runs.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fock::{
    current_from_rdm, mean_position_from_densities, natural_spectrum, one_body_rdm, FockBasis, ManyBodyState,
};
use crate::krylov::{propagate_vector, KrylovOptions};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::model::{build_hamiltonian, BoseHubbardModel, SparseHamiltonian};
use crate::{Error, Result};

/// Initial currents below `STATIONARY_CURRENT * J * a` count as stationary.
pub const STATIONARY_CURRENT: f64 = 1e-8;

pub const DEFAULT_PROPAGATOR_TOLERANCE: f64 = 1e-10;

/// How the phase gradient is put on the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boost {
    None,
    /// Site `j` acquires phase `j * delta_phi`.
    ImprintStep {
        delta_phi: f64,
    },
    /// Multiplies by `exp(i k x)` at the (centered) site positions.
    ImprintGradient {
        k: f64,
    },
    /// Evolves under `H + γ Σ x_i n_i` for `duration`.
    TiltPulse {
        gamma: f64,
        duration: f64,
    },
}

impl Boost {
    /// Tilt that imprints a neighbour phase step `delta_phi` in the impulse
    /// limit, `γ = -Δφ ħ / (a T)`. The sign makes positive steps push atoms
    /// towards larger `x`, like the matching [`Boost::ImprintStep`].
    pub fn tilt_for_phase_step(delta_phi: f64, duration: f64, lattice_constant: f64) -> Self {
        Boost::TiltPulse { gamma: -delta_phi / (lattice_constant * duration), duration }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Boost::None => "none",
            Boost::ImprintStep { .. } => "imprint_step",
            Boost::ImprintGradient { .. } => "imprint_gradient",
            Boost::TiltPulse { .. } => "tilt_pulse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    pub boost: Boost,
    /// On-site interaction during the probe evolution.
    pub probe_u: f64,
    pub total_time: f64,
    pub dt_sample: f64,
    pub propagator_tolerance: f64,
}

impl QuenchProtocol {
    pub fn new(boost: Boost, probe_u: f64, total_time: f64, dt_sample: f64) -> Self {
        Self { boost, probe_u, total_time, dt_sample, propagator_tolerance: DEFAULT_PROPAGATOR_TOLERANCE }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return bad(format!("total_time must be > 0, got {}", self.total_time));
        }
        if !(self.dt_sample > 0.0) || !self.dt_sample.is_finite() {
            return bad(format!("dt_sample must be > 0, got {}", self.dt_sample));
        }
        if !(self.propagator_tolerance > 0.0) {
            return bad(format!("propagator tolerance must be > 0, got {}", self.propagator_tolerance));
        }
        if !self.probe_u.is_finite() {
            return bad("probe_u must be finite".into());
        }
        match self.boost {
            Boost::TiltPulse { gamma, duration } => {
                if !(duration > 0.0) || !gamma.is_finite() {
                    return bad(format!("tilt pulse needs T > 0 and finite gamma, got T = {duration}"));
                }
                // the pulse must be short against the probe dynamics
                if duration >= self.total_time / 10.0 {
                    return bad(format!(
                        "tilt duration {duration} must be below total_time/10 = {}",
                        self.total_time / 10.0
                    ));
                }
            }
            Boost::ImprintStep { delta_phi: v } | Boost::ImprintGradient { k: v } if !v.is_finite() => {
                return bad("imprint phase must be finite".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.total_time / self.dt_sample + 1e-9).floor() as usize + 1
    }
}

/// Run metadata stored with every time series.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchMeta {
    pub protocol: QuenchProtocol,
    pub prep_model: BoseHubbardModel,
    pub probe_model: BoseHubbardModel,
    pub n_atoms: usize,
    pub n_sites: usize,
    /// Current of the initial state under the preparation model.
    pub initial_current: f64,
    pub stationary: bool,
}

/// Sampled observables of a quench; `t = 0` is the end of the boost.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    /// `⟨x⟩ / a`.
    pub mean_x: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    pub current: Vec<f64>,
    pub meta: QuenchMeta,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Lowest eigenstate with its energy.
///
/// The global phase is fixed by making the largest-magnitude amplitude
/// (lowest index among near ties) real and positive.
pub fn ground_state(basis: Arc<FockBasis>, h: &SparseHamiltonian) -> Result<(ManyBodyState, f64)> {
    ground_state_with(basis, h, &LanczosOptions::default())
}

pub fn ground_state_with(
    basis: Arc<FockBasis>,
    h: &SparseHamiltonian,
    options: &LanczosOptions,
) -> Result<(ManyBodyState, f64)> {
    if h.dimension() != basis.dimension() {
        return Err(Error::DimensionMismatch { expected: basis.dimension(), found: h.dimension() });
    }
    let pair = lowest_eigenpair(h, options)?;
    let mut vector = pair.vector;
    fix_phase(&mut vector);
    Ok((ManyBodyState::normalized(basis, vector)?, pair.value))
}

fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|z| *z *= phase);
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub onsite_u: f64,
    pub state: ManyBodyState,
    pub energy: f64,
    pub condensate_fraction: f64,
}

/// Ground states of `base_model` for each interaction in `u_list` (ascending).
///
/// Members are computed concurrently and returned in input order.
pub fn ground_state_family(
    basis: Arc<FockBasis>,
    base_model: &BoseHubbardModel,
    u_list: &[f64],
) -> Result<Vec<FamilyMember>> {
    if u_list.is_empty() {
        return Err(Error::InvalidParameter("interaction list is empty".into()));
    }
    if u_list.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("interaction list must be ascending".into()));
    }
    let family: Vec<FamilyMember> = u_list
        .par_iter()
        .map(|&u| {
            let model = base_model.clone().with_onsite_u(u);
            let h = build_hamiltonian(&basis, &model)?;
            let (state, energy) = ground_state(basis.clone(), &h)?;
            let condensate_fraction = natural_spectrum(&one_body_rdm(&state)).condensate_fraction;
            Ok(FamilyMember { onsite_u: u, state, energy, condensate_fraction })
        })
        .collect::<Result<_>>()?;
    for w in family.windows(2) {
        if w[1].condensate_fraction > w[0].condensate_fraction + 1e-9 {
            log::warn!(
                "condensate fraction rises from {} (U = {}) to {} (U = {})",
                w[0].condensate_fraction,
                w[0].onsite_u,
                w[1].condensate_fraction,
                w[1].onsite_u
            );
        }
    }
    Ok(family)
}

/// Site phases `j Δφ` for a uniform step imprint.
pub fn step_phases(n_sites: usize, delta_phi: f64) -> Vec<f64> {
    (0..n_sites).map(|j| j as f64 * delta_phi).collect()
}

/// Site phases `k x_j` for a gradient imprint on centered sites.
pub fn gradient_phases(n_sites: usize, k: f64, lattice_constant: f64) -> Vec<f64> {
    crate::fock::centered_sites(n_sites).into_iter().map(|x| k * x * lattice_constant).collect()
}

/// Multiplies the amplitude of every occupation vector by `exp(i Σ_j φ_j n_j)`.
pub fn apply_phase_imprint(state: &ManyBodyState, phases: &[f64]) -> Result<ManyBodyState> {
    let basis = state.basis();
    if phases.len() != basis.n_sites() {
        return Err(Error::DimensionMismatch { expected: basis.n_sites(), found: phases.len() });
    }
    let amplitudes = state
        .amplitudes()
        .iter()
        .zip(basis.iter())
        .map(|(a, occ)| {
            let phase: f64 = occ.iter().zip(phases).map(|(&n, p)| n as f64 * p).sum();
            a * Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(ManyBodyState::from_parts(basis.clone(), amplitudes, state.time()))
}

/// Evolves `state` for `duration` under `model` with an extra tilt `gamma`.
pub fn apply_tilt_pulse(
    state: &ManyBodyState,
    model: &BoseHubbardModel,
    gamma: f64,
    duration: f64,
    tolerance: f64,
) -> Result<ManyBodyState> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!("tilt duration must be > 0, got {duration}")));
    }
    let tilted = model.clone().with_tilt(model.tilt_gamma + gamma);
    let h = build_hamiltonian(state.basis(), &tilted)?;
    propagate(state, &h, duration, tolerance)
}

/// `exp(-iHt)|ψ⟩` with adaptive Krylov stepping; advances the state's clock.
pub fn propagate(state: &ManyBodyState, h: &SparseHamiltonian, duration: f64, tolerance: f64) -> Result<ManyBodyState> {
    let options = KrylovOptions { tolerance, ..KrylovOptions::default() };
    let (amplitudes, _) = propagate_vector(h, state.amplitudes(), duration, &options)?;
    Ok(ManyBodyState::from_parts(state.basis().clone(), amplitudes, state.time() + duration))
}

/// Applies the boost to `initial`, switches the interaction to `probe_u` and
/// samples `⟨x⟩`, densities and current every `dt_sample`.
///
/// `model` is the preparation Hamiltonian; it is used for the stationarity
/// check of `initial` and, with `probe_u` substituted, for the evolution.
pub fn run_quench(
    basis: &Arc<FockBasis>,
    model: &BoseHubbardModel,
    initial: &ManyBodyState,
    protocol: &QuenchProtocol,
) -> Result<TimeSeries> {
    protocol.validate()?;
    if !basis.same_space(initial.basis()) {
        return Err(Error::BasisMismatch);
    }
    let n_sites = basis.n_sites();
    model.validate(n_sites)?;
    let probe_model = model.clone().with_onsite_u(protocol.probe_u);

    let initial_current = current_from_rdm(&one_body_rdm(initial), model);
    let stationary = initial_current.abs() <= STATIONARY_CURRENT * model.hop_j * model.lattice_constant;
    if !stationary {
        log::warn!("initial state carries current {initial_current:.3e}; boost diagnostics assume a stationary state");
    }

    let tol = protocol.propagator_tolerance;
    let mut state = match protocol.boost {
        Boost::None => initial.clone(),
        Boost::ImprintStep { delta_phi } => apply_phase_imprint(initial, &step_phases(n_sites, delta_phi))?,
        Boost::ImprintGradient { k } => {
            apply_phase_imprint(initial, &gradient_phases(n_sites, k, model.lattice_constant))?
        }
        Boost::TiltPulse { gamma, duration } => apply_tilt_pulse(initial, &probe_model, gamma, duration, tol)?,
    }
    .with_time(0.0);

    let h = build_hamiltonian(basis, &probe_model)?;
    let n = protocol.sample_count();
    let mut series = TimeSeries {
        times: Vec::with_capacity(n),
        mean_x: Vec::with_capacity(n),
        densities: Vec::with_capacity(n),
        current: Vec::with_capacity(n),
        meta: QuenchMeta {
            protocol: *protocol,
            prep_model: model.clone(),
            probe_model: probe_model.clone(),
            n_atoms: basis.n_atoms(),
            n_sites,
            initial_current,
            stationary,
        },
    };
    for k in 0..n {
        if k > 0 {
            state = propagate(&state, &h, protocol.dt_sample, tol)?;
        }
        let rdm = one_body_rdm(&state);
        let densities: Vec<f64> = rdm.matrix().diagonal().iter().map(|z| z.re).collect();
        series.times.push(k as f64 * protocol.dt_sample);
        series.mean_x.push(mean_position_from_densities(&densities));
        series.current.push(current_from_rdm(&rdm, &probe_model));
        series.densities.push(densities);
    }
    Ok(series)
}
