//! Short-iterative Lanczos propagation of `exp(-iHt)|ψ⟩` (ħ = 1).
//!
//! Every step projects `H` onto an `m`-dimensional Krylov space around the
//! current vector and exponentiates the tridiagonal projection exactly. The
//! step length adapts so that the standard a-posteriori error estimate
//! `β_m |[exp(-iTτ) e_1]_m|` stays below `tolerance · τ / duration`; the
//! accumulated error of a full call is therefore bounded by `tolerance`.

use num_complex::Complex64;

use crate::lanczos::krylov_basis;
use crate::linalg;
use crate::model::SparseHamiltonian;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    pub tolerance: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { krylov_dim: 30, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropagationStats {
    pub steps: usize,
    pub rejected: usize,
}

/// Propagates `psi` by `duration` under `h`.
pub fn propagate_vector(
    h: &SparseHamiltonian,
    psi: &[Complex64],
    duration: f64,
    options: &KrylovOptions,
) -> Result<(Vec<Complex64>, PropagationStats)> {
    if psi.len() != h.dimension() {
        return Err(Error::DimensionMismatch { expected: h.dimension(), found: psi.len() });
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!("duration must be finite and >= 0, got {duration}")));
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParameter("propagator tolerance must be > 0".into()));
    }
    let mut stats = PropagationStats::default();
    let mut state = psi.to_vec();
    if duration == 0.0 {
        return Ok((state, stats));
    }

    let m_max = options.krylov_dim.max(2);
    let norm_bound = h.norm_bound().max(f64::MIN_POSITIVE);
    // a first guess that keeps the Krylov series well inside its radius
    let mut tau = (m_max as f64 / (2.0 * norm_bound)).min(duration);
    let min_step = duration * 1e-14;
    let mut elapsed = 0.0;

    while elapsed < duration {
        let amplitude = linalg::norm(&state);
        if amplitude == 0.0 {
            break;
        }
        let basis = krylov_basis(h, &state, m_max)?;
        let m = basis.alpha.len();
        let beta_out = if basis.exhausted { 0.0 } else { basis.beta[m - 1] };
        let (theta, s) = linalg::tridiagonal_eigen(&basis.alpha, &basis.beta[..m - 1]);

        let coefficients = |t: f64| -> Vec<Complex64> {
            // exp(-iTt) e_1 = S exp(-iΘt) Sᵀ e_1
            (0..m)
                .map(|r| (0..m).map(|k| Complex64::from_polar(s[(0, k)] * s[(r, k)], -theta[k] * t)).sum::<Complex64>())
                .collect()
        };

        let remaining = duration - elapsed;
        let mut step = if beta_out == 0.0 { remaining } else { tau.min(remaining) };
        let mut factor;
        let y = loop {
            let y = coefficients(step);
            let error = beta_out * y[m - 1].norm() * amplitude;
            let allowed = options.tolerance * step / duration;
            if error <= allowed {
                factor = if error > 0.0 { 0.9 * (allowed / error).powf(1.0 / m as f64) } else { 4.0 };
                break y;
            }
            stats.rejected += 1;
            factor = (0.9 * (allowed / error).powf(1.0 / m as f64)).clamp(0.1, 0.9);
            step *= factor;
            if step < min_step {
                return Err(Error::StepUnderflow { step, time: elapsed });
            }
        };

        let mut next = vec![Complex64::new(0.0, 0.0); state.len()];
        for (c, v) in y.iter().zip(&basis.vectors) {
            linalg::axpy(c * amplitude, v, &mut next);
        }
        state = next;
        stats.steps += 1;
        if step >= remaining {
            break;
        }
        elapsed += step;
        tau = step * factor.clamp(1.0, 4.0);
    }
    Ok((state, stats))
}
