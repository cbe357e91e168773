//! Acceptance suite: one line per criterion, run at the stated tolerances and
//! wall-clock budgets. Exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;
use std::time::{Duration, Instant};

use boostprobe::output::render_tables;
use boostprobe::{find_preset, run_scenario, RunResult, ScenarioConfig, PRESETS};
use boostprobe_core::analysis::oscillation_amplitude;
use boostprobe_core::dynamics::{
    apply_phase_imprint, ground_state, propagate, run_quench, step_phases, Boost, QuenchProtocol,
};
use boostprobe_core::fock::{
    current_expectation, make_mott_state, make_superfluid_state, one_body_rdm, FockBasis, ManyBodyState,
};
use boostprobe_core::lanczos::{lowest_eigenpair, LanczosOptions};
use boostprobe_core::metrology::{
    oscillation_period_estimate, required_tilt_product, GradiometerParams, GRAVITY, PLANCK,
};
use boostprobe_core::model::{build_hamiltonian, BoseHubbardModel, Boundary};
use boostprobe_core::singleparticle::{cross_validated_spectrum, tunneling_from_band, CellBoundary, ContinuousLattice};
use boostprobe_core::Complex64;
use nalgebra::{DMatrix, DVector};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Duration, Check); 9] = [
        ("1 SF/MI contrast", Duration::from_secs(30), sf_mi_contrast),
        ("2 linear law", Duration::from_secs(240), linear_law),
        ("3 interacting probe", Duration::from_secs(120), interacting_probe),
        ("4 sine law", Duration::from_secs(60), sine_law),
        ("5 frequency law", Duration::from_secs(60), frequency_law),
        ("6 band extraction", Duration::from_secs(30), band_extraction),
        ("7 metrology numbers", Duration::from_secs(1), metrology_numbers),
        ("8 oracle suite", Duration::from_secs(60), oracle_suite),
        ("9 determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Outcome { pass: false, detail: "panicked".into() });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "{} criterion {name}: {} [{:.2} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
        );
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

fn preset(name: &str) -> RunResult {
    let p = find_preset(name).unwrap();
    run_scenario(&ScenarioConfig::parse(p.source).unwrap()).unwrap()
}

fn fit_value(result: &RunResult, table: &str, column: &str) -> f64 {
    result.table(table).unwrap().column(column).unwrap()[0]
}

// ---------------------------------------------------------------------------

fn sf_mi_contrast() -> Outcome {
    let basis = Arc::new(FockBasis::new(5, 5).unwrap());
    let protocol = QuenchProtocol::new(Boost::ImprintStep { delta_phi: FRAC_PI_2 }, 0.0, 60.0, 0.05);
    let amplitude = |u: f64| {
        let model = BoseHubbardModel::new(1.0, u);
        let h = build_hamiltonian(&basis, &model).unwrap();
        let (gs, _) = ground_state(basis.clone(), &h).unwrap();
        let ts = run_quench(&basis, &model, &gs, &protocol).unwrap();
        oscillation_amplitude(&ts.mean_x, protocol.dt_sample, None).unwrap().0
    };
    let (sf, mi) = (amplitude(0.0), amplitude(50.0));
    let ratio = mi / sf;
    Outcome { pass: ratio <= 0.05, detail: format!("A(U=50)/A(U=0) = {mi:.4}/{sf:.4} = {ratio:.4} (need <= 0.05)") }
}

fn linear_law() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig2-sweep", "fig3-sweep"] {
        let start = Instant::now();
        let result = preset(name);
        let r2 = fit_value(&result, "sweep_fit.csv", "r_squared");
        let points = result.table("sweep.csv").unwrap().rows.len();
        let secs = start.elapsed().as_secs_f64();
        pass &= r2 >= 0.98 && points >= 6 && secs < 120.0;
        parts.push(format!("{name}: R² = {r2:.4} over {points} U values in {secs:.1} s"));
    }
    Outcome { pass, detail: format!("{} (need R² >= 0.98, < 120 s each)", parts.join("; ")) }
}

fn interacting_probe() -> Outcome {
    let free = fit_value(&preset("fig3-sweep"), "sweep_fit.csv", "slope");
    let result = preset("fig33-interacting");
    let r2 = fit_value(&result, "sweep_fit.csv", "r_squared");
    let slope = fit_value(&result, "sweep_fit.csv", "slope");
    Outcome {
        pass: r2 >= 0.95 && slope < free,
        detail: format!(
            "probe U = 0.1: R² = {r2:.4}, slope {slope:.4} vs {free:.4} at U = 0 (need R² >= 0.95, smaller slope)"
        ),
    }
}

fn sine_law() -> Outcome {
    // periodic ring, U = 0: ⟨Ĵ⟩ = 2JaN sin Δφ for commensurate steps
    let (n, m, j, a) = (3, 8, 1.0, 1.0);
    let basis = Arc::new(FockBasis::new(n, m).unwrap());
    let model = BoseHubbardModel::new(j, 0.0).with_boundary(Boundary::Periodic).with_lattice_constant(a);
    let h = build_hamiltonian(&basis, &model).unwrap();
    let (gs, _) = ground_state(basis.clone(), &h).unwrap();
    let mut worst = 0.0f64;
    for k in 0..m {
        let dphi = 2.0 * PI * k as f64 / m as f64;
        let kicked = apply_phase_imprint(&gs, &step_phases(m, dphi)).unwrap();
        let expected = 2.0 * j * a * n as f64 * dphi.sin();
        worst = worst.max((current_expectation(&kicked, &model) - expected).abs());
    }
    let r2 = fit_value(&preset("fig1-phase-sweep"), "phase_fit.csv", "r_squared");
    Outcome {
        pass: worst <= 1e-8 && r2 >= 0.98,
        detail: format!(
            "ring current max deviation {worst:.2e} (need <= 1e-8); double-well c·sin fit R² = {r2:.6} (need >= 0.98)"
        ),
    }
}

fn frequency_law() -> Outcome {
    let result = preset("fig4b-ka-sweep");
    let table = result.table("ka_sweep.csv").unwrap();
    let ka = table.column("ka_rad").unwrap();
    let measured = table.column("omega_extracted").unwrap();
    let law = table.column("omega_eq7").unwrap();
    let (mut worst, mut at) = (0.0f64, 0.0);
    for ((k, w), w0) in ka.iter().zip(&measured).zip(&law) {
        // independent evaluation of (2π/31)(J/ħ) sin ka with J = ħ = 1
        let oracle = 2.0 * PI / 31.0 * k.sin();
        assert!((w0 - oracle).abs() < 1e-12 * oracle);
        let err = (w - oracle).abs() / oracle;
        if err > worst {
            (worst, at) = (err, *k);
        }
    }
    Outcome {
        pass: worst <= 0.2 && ka.len() == 14,
        detail: format!("{} ka values, max relative error {worst:.4} at ka = {at} (need <= 0.2)", ka.len()),
    }
}

fn band_extraction() -> Outcome {
    let lattice = ContinuousLattice::new(25.0, 1.0, 32, CellBoundary::Periodic);
    let (levels, disagreement) = cross_validated_spectrum(&lattice, 33, 1e-5).unwrap();
    let band = tunneling_from_band(&levels, 32).unwrap();
    // J = h × 0.05 Hz with ħ = 1
    let target = 2.0 * PI * 0.05;
    let err = (band.hop_j - target).abs() / target;
    Outcome {
        pass: err <= 0.1 && disagreement <= 1e-5,
        detail: format!(
            "J = {:.5} vs {target:.5} ({:.2}% off, need <= 10%); FD/PW disagreement {disagreement:.2e} (need <= 1e-5)",
            band.hop_j,
            100.0 * err
        ),
    }
}

fn metrology_numbers() -> Outcome {
    let rb = required_tilt_product(&GradiometerParams::rb87_gravity(GRAVITY, 390e-9), FRAC_PI_2).unwrap();
    let cr = required_tilt_product(&GradiometerParams::cr52_magnetic(3000e-9, 532e-9), FRAC_PI_2).unwrap();
    let period = oscillation_period_estimate(PLANCK * 2.5, 1000, FRAC_PI_2).unwrap();
    let rb_ok = (rb - 3.0e-4).abs() <= 0.1 * 3.0e-4;
    let cr_ok = (cr - 1.9).abs() <= 0.1 * 1.9;
    let period_ok = (period - 63.6).abs() <= 0.02 * 63.6;
    Outcome {
        pass: rb_ok && cr_ok && period_ok,
        detail: format!("Rb sinθT = {rb:.4e} s, Cr sinθT = {cr:.4} s, period = {period:.2} s"),
    }
}

// ---------------------------------------------------------------------------
// criterion 8: dense oracles

fn enumerate(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            enumerate(n - first, m - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Dense matrix in the library's basis order, assembled hop by hop.
fn dense(basis: &FockBasis, model: &BoseHubbardModel) -> DMatrix<Complex64> {
    let states: Vec<Vec<usize>> = basis.iter().map(|o| o.iter().map(|&v| v as usize).collect()).collect();
    assert_eq!(states.len(), enumerate(basis.n_atoms(), basis.n_sites()).len());
    let m = basis.n_sites();
    let index: HashMap<&Vec<usize>, usize> = states.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let mut bonds: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    if model.boundary == Boundary::Periodic && m > 2 {
        bonds.push((m - 1, 0));
    }
    let x0 = (m as f64 - 1.0) / 2.0;
    let mut h = DMatrix::zeros(states.len(), states.len());
    for (col, s) in states.iter().enumerate() {
        for (i, &ni) in s.iter().enumerate() {
            let n = ni as f64;
            let x = (i as f64 - x0) * model.lattice_constant;
            h[(col, col)] += Complex64::new(0.5 * model.onsite_u * n * (n - 1.0) + model.tilt_gamma * x * n, 0.0);
        }
        for &(i, j) in &bonds {
            for (from, to) in [(i, j), (j, i)] {
                if s[from] > 0 {
                    let mut t = s.clone();
                    let amp = (t[from] as f64 * (t[to] + 1) as f64).sqrt();
                    t[from] -= 1;
                    t[to] += 1;
                    h[(index[&t], col)] -= Complex64::new(model.hop_j * amp, 0.0);
                }
            }
        }
    }
    h
}

fn expm_minus_i(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let a = h * Complex64::new(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = a / Complex64::new(2f64.powi(squarings), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = result.clone();
    for k in 1..=30 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn rdm_deviation(state: &ManyBodyState, expected: impl Fn(usize, usize) -> f64) -> f64 {
    let rdm = one_body_rdm(state);
    let m = rdm.n_sites();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            worst = worst.max((rdm.matrix()[(i, j)] - Complex64::new(expected(i, j), 0.0)).norm());
        }
    }
    worst
}

fn oracle_suite() -> Outcome {
    let mut krylov = 0.0f64;
    for (n, m, model) in [
        (3, 7, BoseHubbardModel::new(1.0, 2.5).with_tilt(0.2)),
        (5, 5, BoseHubbardModel::new(1.0, 0.0)),
        (3, 8, BoseHubbardModel::new(0.7, 1.0).with_boundary(Boundary::Periodic)),
    ] {
        let basis = Arc::new(FockBasis::new(n, m).unwrap());
        assert!(basis.dimension() <= 200);
        let h = build_hamiltonian(&basis, &model).unwrap();
        let psi0 = apply_phase_imprint(&make_superfluid_state(basis.clone()).unwrap(), &step_phases(m, 0.9)).unwrap();
        let evolved = propagate(&psi0, &h, 7.3, 1e-12).unwrap();
        let exact = expm_minus_i(&dense(&basis, &model), 7.3) * DVector::from_column_slice(psi0.amplitudes());
        let overlap: Complex64 = exact.iter().zip(evolved.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        krylov = krylov.max((1.0 - overlap.norm()).abs());
    }

    let mut lanczos = 0.0f64;
    for (n, m, model) in [
        (5, 5, BoseHubbardModel::new(1.0, 5.0)),
        (5, 6, BoseHubbardModel::new(1.0, 50.0)),
        (5, 7, BoseHubbardModel::new(1.0, 1.0).with_boundary(Boundary::Periodic)),
    ] {
        let basis = FockBasis::new(n, m).unwrap();
        assert!(basis.dimension() <= 500);
        let h = build_hamiltonian(&basis, &model).unwrap();
        let value = lowest_eigenpair(&h, &LanczosOptions::default()).unwrap().value;
        let exact = dense(&basis, &model).symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        lanczos = lanczos.max((value - exact).abs());
    }

    // superfluid: ρ_ij = N/M everywhere; Mott: ρ = diag(1)
    let mut rdm = 0.0f64;
    for (n, m) in [(2, 2), (5, 5), (3, 6)] {
        let basis = Arc::new(FockBasis::new(n, m).unwrap());
        let fill = n as f64 / m as f64;
        rdm = rdm.max(rdm_deviation(&make_superfluid_state(basis).unwrap(), |_, _| fill));
    }
    for m in [2, 5] {
        let basis = Arc::new(FockBasis::new(m, m).unwrap());
        let mott = make_mott_state(basis, &vec![1; m]).unwrap();
        rdm = rdm.max(rdm_deviation(&mott, |i, j| if i == j { 1.0 } else { 0.0 }));
    }

    Outcome {
        pass: krylov <= 1e-8 && lanczos <= 1e-9 && rdm <= 1e-10,
        detail: format!(
            "Krylov overlap error {krylov:.1e} (<= 1e-8), Lanczos energy error {lanczos:.1e} (<= 1e-9), RDM error {rdm:.1e} (<= 1e-10)"
        ),
    }
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    let mut files = 0;
    for p in PRESETS {
        let cfg = ScenarioConfig::parse(p.source).unwrap();
        let first = render_tables(&run_scenario(&cfg).unwrap().tables).unwrap();
        let second = render_tables(&run_scenario(&cfg).unwrap().tables).unwrap();
        files += first.len();
        if first.len() != second.len() || first.iter().zip(&second).any(|(a, b)| a.1 != b.1) {
            differing.push(p.name);
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{} presets, {files} CSVs byte-identical across two runs", PRESETS.len())
        } else {
            format!("differing presets: {}", differing.join(", "))
        },
    }
}
