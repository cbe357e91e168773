//! Cross-checks against brute-force dense constructions that share no code
//! with the sparse solvers.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use boostprobe_core::dynamics::{
    apply_phase_imprint, apply_tilt_pulse, ground_state, propagate, run_quench, step_phases, Boost, QuenchProtocol,
};
use boostprobe_core::fock::{
    current_expectation, make_mott_state, make_superfluid_state, natural_spectrum, one_body_rdm, site_densities,
    FockBasis, ManyBodyState,
};
use boostprobe_core::lanczos::{lowest_eigenpair, LanczosOptions};
use boostprobe_core::model::{build_hamiltonian, BoseHubbardModel, Boundary};
use boostprobe_core::Complex64;
use nalgebra::DMatrix;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// All occupation vectors of `n` bosons on `m` sites, in any order.
fn enumerate(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in enumerate(n - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Dense Bose-Hubbard matrix in the ordering of `states`, built by acting
/// with `a†_j a_i` term by term.
fn dense_hamiltonian(states: &[Vec<usize>], model: &BoseHubbardModel) -> DMatrix<Complex64> {
    let m = states[0].len();
    let index: HashMap<&Vec<usize>, usize> = states.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let mut h = DMatrix::zeros(states.len(), states.len());
    let mut bonds: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    if model.boundary == Boundary::Periodic && m > 2 {
        bonds.push((m - 1, 0));
    }
    let x0 = (m as f64 - 1.0) / 2.0;
    for (col, s) in states.iter().enumerate() {
        for (i, &ni) in s.iter().enumerate() {
            let n = ni as f64;
            let eps = model.site_energies.get(i).copied().unwrap_or(0.0);
            let x = (i as f64 - x0) * model.lattice_constant;
            h[(col, col)] += c(0.5 * model.onsite_u * n * (n - 1.0) + (eps + model.tilt_gamma * x) * n);
        }
        for &(i, j) in &bonds {
            for (from, to) in [(i, j), (j, i)] {
                if s[from] == 0 {
                    continue;
                }
                let mut t = s.clone();
                let amp = (t[from] as f64).sqrt();
                t[from] -= 1;
                t[to] += 1;
                let amp = amp * (t[to] as f64).sqrt();
                h[(index[&t], col)] += c(-model.hop_j * amp);
            }
        }
    }
    h
}

/// Dense matrix in the library's basis order.
fn dense_in_basis(basis: &FockBasis, model: &BoseHubbardModel) -> DMatrix<Complex64> {
    let states: Vec<Vec<usize>> = basis.iter().map(|o| o.iter().map(|&v| v as usize).collect()).collect();
    dense_hamiltonian(&states, model)
}

/// `exp(-iHt)` by scaling and squaring of a Taylor series.
fn expm_minus_i(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let a = h * Complex64::new(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = a / c(2f64.powi(squarings as i32));
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &a / c(k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[test]
fn sparse_hamiltonian_matches_brute_force() {
    let cases = [
        (3, 4, BoseHubbardModel::new(0.8, 1.7).with_tilt(0.3)),
        (
            4,
            3,
            BoseHubbardModel::new(1.0, 0.4).with_boundary(Boundary::Periodic).with_site_energies(vec![0.1, -0.2, 0.5]),
        ),
        (
            2,
            6,
            BoseHubbardModel::new(1.3, 2.0)
                .with_boundary(Boundary::Periodic)
                .with_lattice_constant(2.0)
                .with_tilt(-0.1),
        ),
        (5, 2, BoseHubbardModel::new(0.5, 3.0).with_boundary(Boundary::Periodic)),
    ];
    for (n, m, model) in cases {
        let basis = FockBasis::new(n, m).unwrap();
        assert_eq!(basis.dimension(), enumerate(n, m).len());
        let sparse = build_hamiltonian(&basis, &model).unwrap();
        let dense = dense_in_basis(&basis, &model);
        for r in 0..basis.dimension() {
            for col in 0..basis.dimension() {
                assert!((sparse.get(r, col) - dense[(r, col)]).norm() < 1e-13, "N={n} M={m} ({r},{col})");
            }
        }
        assert!(sparse.hermiticity_error() < 1e-15);
    }
}

#[test]
fn krylov_matches_dense_exponential() {
    // dims 84, 126, 120, 165 (all <= 200)
    let cases = [
        (3, 7, BoseHubbardModel::new(1.0, 2.5).with_tilt(0.2)),
        (5, 5, BoseHubbardModel::new(1.0, 0.0)),
        (3, 8, BoseHubbardModel::new(0.7, 1.0).with_boundary(Boundary::Periodic)),
        (3, 9, BoseHubbardModel::new(1.0, 8.0)),
    ];
    for (n, m, model) in cases {
        let basis = Arc::new(FockBasis::new(n, m).unwrap());
        assert!(basis.dimension() <= 200);
        let h = build_hamiltonian(&basis, &model).unwrap();
        let sf = make_superfluid_state(basis.clone()).unwrap();
        let psi0 = apply_phase_imprint(&sf, &step_phases(m, 0.9)).unwrap();
        let t = 7.3;
        let krylov = propagate(&psi0, &h, t, 1e-12).unwrap();
        let u = expm_minus_i(&dense_in_basis(&basis, &model), t);
        let v0 = nalgebra::DVector::from_column_slice(psi0.amplitudes());
        let exact = &u * v0;
        let overlap: Complex64 = exact.iter().zip(krylov.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        assert!((1.0 - overlap.norm()).abs() <= 1e-8, "N={n} M={m}: |overlap| = {}", overlap.norm());
        let diff = exact.iter().zip(krylov.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-8, "N={n} M={m}: distance {diff}");
    }
}

#[test]
fn lanczos_matches_dense_diagonalization() {
    // dims 126, 252, 462, 330
    let cases = [
        (5, 5, BoseHubbardModel::new(1.0, 5.0)),
        (5, 6, BoseHubbardModel::new(1.0, 50.0)),
        (5, 7, BoseHubbardModel::new(1.0, 1.0).with_boundary(Boundary::Periodic)),
        (4, 8, BoseHubbardModel::new(0.6, 2.0).with_tilt(0.05)),
    ];
    for (n, m, model) in cases {
        let basis = FockBasis::new(n, m).unwrap();
        assert!(basis.dimension() <= 500);
        let h = build_hamiltonian(&basis, &model).unwrap();
        let pair = lowest_eigenpair(&h, &LanczosOptions::default()).unwrap();
        let dense = dense_in_basis(&basis, &model);
        let exact = dense.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((pair.value - exact).abs() <= 1e-9, "N={n} M={m}: {} vs {exact}", pair.value);
    }
}

#[test]
fn rdm_of_reference_states() {
    for (n, m) in [(2, 2), (5, 5), (3, 6), (4, 3)] {
        let basis = Arc::new(FockBasis::new(n, m).unwrap());
        let rdm = one_body_rdm(&make_superfluid_state(basis.clone()).unwrap());
        let fill = n as f64 / m as f64;
        for i in 0..m {
            for j in 0..m {
                assert!((rdm.matrix()[(i, j)] - c(fill)).norm() < 1e-10);
            }
        }
        let spec = natural_spectrum(&rdm);
        assert!((spec.condensate_fraction - 1.0).abs() < 1e-10);
    }
    let basis = Arc::new(FockBasis::new(5, 5).unwrap());
    let rdm = one_body_rdm(&make_mott_state(basis, &[1; 5]).unwrap());
    for i in 0..5 {
        for j in 0..5 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((rdm.matrix()[(i, j)] - c(expected)).norm() < 1e-10);
        }
    }
    assert!((natural_spectrum(&rdm).condensate_fraction - 0.2).abs() < 1e-10);

    // non-uniform filling: ρ = diag(n_i), condensate fraction max(n_i)/N
    let basis = Arc::new(FockBasis::new(4, 3).unwrap());
    let rdm = one_body_rdm(&make_mott_state(basis, &[2, 0, 2]).unwrap());
    assert!((rdm.matrix()[(0, 0)] - c(2.0)).norm() < 1e-12);
    assert!((natural_spectrum(&rdm).condensate_fraction - 0.5).abs() < 1e-12);
}

#[test]
fn rdm_of_general_condensate() {
    // ρ_ij = N conj(c_i) c_j for all atoms in orbital c
    let orbital = [c(0.3), Complex64::new(0.5, -0.2), Complex64::new(-0.1, 0.6), c(0.2)];
    let basis = Arc::new(FockBasis::new(3, 4).unwrap());
    let state = ManyBodyState::condensate(basis, &orbital).unwrap();
    let norm2: f64 = orbital.iter().map(|z| z.norm_sqr()).sum();
    let rdm = one_body_rdm(&state);
    for i in 0..4 {
        for j in 0..4 {
            let expected = orbital[i].conj() * orbital[j] * (3.0 / norm2);
            assert!((rdm.matrix()[(i, j)] - expected).norm() < 1e-12);
        }
    }
}

#[test]
fn current_drives_centre_of_mass() {
    // open chain: d⟨x⟩/dt = ⟨Ĵ⟩ / (N a)
    let basis = Arc::new(FockBasis::new(3, 5).unwrap());
    let a = 1.5;
    let model = BoseHubbardModel::new(0.9, 1.2).with_lattice_constant(a);
    let h = build_hamiltonian(&basis, &model).unwrap();
    let (gs, _) = ground_state(basis.clone(), &h).unwrap();
    let protocol = QuenchProtocol::new(Boost::ImprintStep { delta_phi: 0.7 }, 1.2, 4.0, 1e-3);
    let ts = run_quench(&basis, &model, &gs, &protocol).unwrap();
    for k in [1, 500, 2000, 3500] {
        let derivative = (ts.mean_x[k + 1] - ts.mean_x[k - 1]) / (2e-3);
        let predicted = ts.current[k] / (3.0 * a);
        assert!((derivative - predicted).abs() < 1e-5, "t = {}: {derivative} vs {predicted}", ts.times[k]);
    }
    // a positive phase step pushes atoms to +x
    assert!(ts.current[0] > 0.0 && ts.mean_x[100] > 0.0);
}

#[test]
fn tilt_pulse_without_hopping_is_an_imprint() {
    // J = U = 0: the pulse only accumulates the phases -γ x_j T
    let basis = Arc::new(FockBasis::new(3, 4).unwrap());
    let model = BoseHubbardModel::new(0.0, 0.0).with_lattice_constant(2.0);
    let sf = make_superfluid_state(basis.clone()).unwrap();
    let dphi = FRAC_PI_2;
    let Boost::TiltPulse { gamma, duration } = Boost::tilt_for_phase_step(dphi, 0.25, 2.0) else { unreachable!() };
    let pulsed = apply_tilt_pulse(&sf, &model, gamma, duration, 1e-12).unwrap();
    let imprinted = apply_phase_imprint(&sf, &step_phases(4, dphi)).unwrap();
    let fidelity = pulsed.overlap(&imprinted).unwrap().norm_sqr();
    assert!((fidelity - 1.0).abs() < 1e-12);
}

#[test]
fn mott_state_does_not_move() {
    let basis = Arc::new(FockBasis::new(4, 4).unwrap());
    let model = BoseHubbardModel::new(1.0, 0.0);
    let mi = make_mott_state(basis.clone(), &[1; 4]).unwrap();
    let protocol = QuenchProtocol::new(Boost::ImprintStep { delta_phi: FRAC_PI_2 }, 0.0, 20.0, 0.1);
    let ts = run_quench(&basis, &model, &mi, &protocol).unwrap();
    assert!(ts.mean_x.iter().all(|x| x.abs() < 1e-10));
    assert!(ts.current.iter().all(|j| j.abs() < 1e-10));
    assert_eq!(current_expectation(&mi, &model), 0.0);
    let densities = site_densities(&mi);
    assert!(ts.densities.iter().all(|d| d.iter().zip(&densities).all(|(a, b)| (a - b).abs() < 1e-10)));
}

#[test]
fn ring_current_follows_sine_law() {
    // U = 0 ring ground state; commensurate steps Δφ = 2πk/M
    let (n, m) = (3, 8);
    let basis = Arc::new(FockBasis::new(n, m).unwrap());
    let a = 1.3;
    let j = 0.8;
    let model = BoseHubbardModel::new(j, 0.0).with_boundary(Boundary::Periodic).with_lattice_constant(a);
    let h = build_hamiltonian(&basis, &model).unwrap();
    let (gs, _) = ground_state(basis.clone(), &h).unwrap();
    for k in 0..=m / 2 {
        let dphi = 2.0 * PI * k as f64 / m as f64;
        let kicked = apply_phase_imprint(&gs, &step_phases(m, dphi)).unwrap();
        let current = current_expectation(&kicked, &model);
        let expected = 2.0 * j * a * n as f64 * dphi.sin();
        assert!((current - expected).abs() <= 1e-8, "Δφ = {dphi}: {current} vs {expected}");
    }
}
