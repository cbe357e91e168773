//! Scenario execution: turns a validated configuration into result tables.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use boostprobe_core::analysis::{
    calibrate_condensate_probe, dominant_frequency, linear_fit, oscillation_amplitude, proportional_fit, tb_frequency,
};
use boostprobe_core::dynamics::{ground_state, ground_state_family, run_quench, Boost, QuenchProtocol, TimeSeries};
use boostprobe_core::fock::{
    make_mott_state, make_superfluid_state, natural_spectrum, one_body_rdm, FockBasis, ManyBodyState,
};
use boostprobe_core::metrology::{
    gradiometer_phase, oscillation_period_estimate, required_tilt_product, GradiometerParams, PLANCK,
};
use boostprobe_core::model::{build_hamiltonian, BoseHubbardModel};
use boostprobe_core::singleparticle::{
    cross_validated_spectrum, recoil_energy, solve_spectrum, tunneling_from_band, tunneling_from_open_band,
    CellBoundary, ContinuousLattice,
};
use boostprobe_core::Error as CoreError;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{BoostSpec, GradiometerSpec, InitialSpec, ProtocolSpec, ScenarioConfig, ScenarioKind, Species};
use crate::error::CliError;
use crate::output::{render_tables, write_atomically, Cell, RunManifest, Table};

/// Tables and headline numbers of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
}

impl RunResult {
    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, CliError> {
    log::info!("running scenario {} ({})", cfg.name, cfg.kind.name());
    match cfg.kind {
        ScenarioKind::DoubleWell | ScenarioKind::Custom => quench_scenario(cfg),
        ScenarioKind::LatticeSweepN | ScenarioKind::LatticeInteracting => sweep_scenario(cfg),
        ScenarioKind::KaSweep => ka_scenario(cfg),
        ScenarioKind::Bands => bands_scenario(cfg),
        ScenarioKind::Gradiometer => {
            let spec = cfg.gradiometer.as_ref().expect("validated");
            let (table, summary) = gradiometer_report(spec)?;
            Ok(RunResult { tables: vec![table], summary })
        }
    }
}

/// Runs the scenario and writes its CSVs plus `manifest.json`.
///
/// The output directory is `out` if given, else the configured one, else
/// `out/<name>`.
pub fn execute(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<(RunManifest, PathBuf), CliError> {
    let start = Instant::now();
    let result = run_scenario(cfg)?;
    let rendered = render_tables(&result.tables)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.kind.name().to_string(),
        name: cfg.name.clone(),
        config: cfg.source.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        summary: Value::Object(result.summary),
        outputs: rendered.iter().map(|(r, _)| r.clone()).collect(),
    };
    let files: Vec<(String, Vec<u8>)> = rendered.into_iter().map(|(r, b)| (r.file, b)).collect();
    write_atomically(&dir, &files, &manifest)?;
    Ok((manifest, dir))
}

// ---------------------------------------------------------------------------
// lattice quenches

fn core_boost(boost: BoostSpec, lattice_constant: f64) -> Boost {
    match boost {
        BoostSpec::None => Boost::None,
        BoostSpec::ImprintStep { delta_phi } => Boost::ImprintStep { delta_phi },
        BoostSpec::ImprintGradient { ka } => Boost::ImprintGradient { k: ka / lattice_constant },
        BoostSpec::Tilt { delta_phi, duration } => Boost::tilt_for_phase_step(delta_phi, duration, lattice_constant),
    }
}

fn core_protocol(p: &ProtocolSpec, boost: BoostSpec, lattice_constant: f64) -> QuenchProtocol {
    QuenchProtocol {
        boost: core_boost(boost, lattice_constant),
        probe_u: p.probe_u,
        total_time: p.total_time,
        dt_sample: p.dt_sample,
        propagator_tolerance: p.tolerance,
    }
}

fn initial_state(
    initial: &InitialSpec,
    basis: &Arc<FockBasis>,
    model: &BoseHubbardModel,
) -> Result<ManyBodyState, CliError> {
    let ctx = CliError::numerical("preparing the initial state");
    match initial {
        InitialSpec::Superfluid => make_superfluid_state(basis.clone()).map_err(ctx),
        InitialSpec::Mott(filling) => make_mott_state(basis.clone(), filling).map_err(ctx),
        InitialSpec::Ground => {
            let h = build_hamiltonian(basis, model).map_err(CliError::numerical("building the Hamiltonian"))?;
            ground_state(basis.clone(), &h).map(|(s, _)| s).map_err(ctx)
        }
    }
}

fn timeseries_table(file_name: String, ts: &TimeSeries) -> Table {
    let mut header: Vec<String> = vec!["t_s".into(), "mean_x_over_a".into(), "current".into()];
    header.extend((1..=ts.meta.n_sites).map(|i| format!("n_site_{i}")));
    let mut table = Table { file_name, header, rows: Vec::with_capacity(ts.len()) };
    for k in 0..ts.len() {
        let mut row = vec![Cell::Float(ts.times[k]), Cell::Float(ts.mean_x[k]), Cell::Float(ts.current[k])];
        row.extend(ts.densities[k].iter().map(|&d| Cell::Float(d)));
        table.rows.push(row);
    }
    table
}

fn amplitude_of(ts: &TimeSeries, window: Option<usize>) -> Result<(f64, usize), CliError> {
    oscillation_amplitude(&ts.mean_x, ts.meta.protocol.dt_sample, window)
        .map_err(CliError::numerical("extracting the oscillation amplitude"))
}

fn frequency_of(ts: &TimeSeries) -> Result<Option<f64>, CliError> {
    match dominant_frequency(&ts.mean_x, ts.meta.protocol.dt_sample) {
        Ok(w) => Ok(Some(w)),
        Err(CoreError::NoPeak) => Ok(None),
        Err(e) => Err(CliError::Numerical { context: "extracting the oscillation frequency".into(), source: e }),
    }
}

fn quench_scenario(cfg: &ScenarioConfig) -> Result<RunResult, CliError> {
    let lat = &cfg.lattice;
    let basis = Arc::new(FockBasis::new(lat.n_atoms, lat.n_sites).map_err(CliError::numerical("building the basis"))?);
    let model = lat.model();
    let initial = initial_state(&cfg.initial, &basis, &model)?;
    let condensate_fraction = natural_spectrum(&one_body_rdm(&initial)).condensate_fraction;

    let protocol = core_protocol(&cfg.protocol, cfg.protocol.boost, lat.lattice_constant);
    let ts = run_quench(&basis, &model, &initial, &protocol).map_err(CliError::numerical("running the quench"))?;
    let (amplitude, window) = amplitude_of(&ts, cfg.protocol.smoothing_window)?;
    let omega = frequency_of(&ts)?;

    let mut summary_table = Table::new(
        "summary.csv",
        &[
            "n_atoms",
            "n_sites",
            "condensate_fraction",
            "initial_current",
            "current_t0",
            "amplitude_over_a",
            "smoothing_window",
            "omega_extracted",
        ],
    );
    summary_table.push(vec![
        lat.n_atoms.into(),
        lat.n_sites.into(),
        condensate_fraction.into(),
        ts.meta.initial_current.into(),
        ts.current[0].into(),
        amplitude.into(),
        window.into(),
        omega.into(),
    ]);
    let mut summary = Map::new();
    summary.insert("condensate_fraction".into(), json!(condensate_fraction));
    summary.insert("amplitude_over_a".into(), json!(amplitude));
    summary.insert("smoothing_window".into(), json!(window));
    summary.insert("stationary_initial_state".into(), json!(ts.meta.stationary));
    summary.insert("boost".into(), json!(protocol.boost.label()));
    let mut tables = vec![timeseries_table("timeseries.csv".into(), &ts), summary_table];

    if !cfg.phase_list.is_empty() {
        let runs: Vec<(f64, f64)> = cfg
            .phase_list
            .par_iter()
            .map(|&phase| {
                let p = core_protocol(&cfg.protocol, cfg.protocol.boost.with_phase(phase), lat.lattice_constant);
                let ts = run_quench(&basis, &model, &initial, &p)
                    .map_err(CliError::numerical(format!("running the quench at delta_phi = {phase}")))?;
                Ok((amplitude_of(&ts, cfg.protocol.smoothing_window)?.0, ts.current[0]))
            })
            .collect::<Result<_, CliError>>()?;
        let mut sweep = Table::new("phase_sweep.csv", &["delta_phi_rad", "amplitude_over_a", "current_t0"]);
        for (&phase, &(amp, current)) in cfg.phase_list.iter().zip(&runs) {
            sweep.push(vec![phase.into(), amp.into(), current.into()]);
        }
        let sines: Vec<f64> = cfg.phase_list.iter().map(|p| p.sin()).collect();
        let amps: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let fit = proportional_fit(&sines, &amps).map_err(CliError::numerical("fitting the sine law"))?;
        let mut fit_table = Table::new("phase_fit.csv", &["coefficient", "r_squared"]);
        fit_table.push(vec![fit.slope.into(), fit.r_squared.into()]);
        summary.insert("sine_law_r_squared".into(), json!(fit.r_squared));
        tables.push(sweep);
        tables.push(fit_table);
    }
    Ok(RunResult { tables, summary })
}

fn sweep_scenario(cfg: &ScenarioConfig) -> Result<RunResult, CliError> {
    let lat = &cfg.lattice;
    let basis = Arc::new(FockBasis::new(lat.n_atoms, lat.n_sites).map_err(CliError::numerical("building the basis"))?);
    let model = lat.model();
    let family = ground_state_family(basis.clone(), &model, &cfg.u_list)
        .map_err(CliError::numerical("preparing ground states"))?;
    let protocol = core_protocol(&cfg.protocol, cfg.protocol.boost, lat.lattice_constant);
    let runs: Vec<(TimeSeries, f64)> = family
        .par_iter()
        .map(|member| {
            let prep = model.clone().with_onsite_u(member.onsite_u);
            let ts = run_quench(&basis, &prep, &member.state, &protocol)
                .map_err(CliError::numerical(format!("running the quench for U = {}", member.onsite_u)))?;
            let (amp, _) = amplitude_of(&ts, cfg.protocol.smoothing_window)?;
            Ok((ts, amp))
        })
        .collect::<Result<_, CliError>>()?;

    let fractions: Vec<f64> = family.iter().map(|m| m.condensate_fraction).collect();
    let amps: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let mut sweep = Table::new("sweep.csv", &["U", "condensate_fraction", "amplitude_over_a"]);
    for ((m, n), a) in family.iter().zip(&fractions).zip(&amps) {
        sweep.push(vec![m.onsite_u.into(), (*n).into(), (*a).into()]);
    }
    let fit =
        linear_fit(&fractions, &amps).map_err(CliError::numerical("fitting amplitude against condensate fraction"))?;
    let mut fit_table = Table::new("sweep_fit.csv", &["probe_u", "slope", "intercept", "r_squared"]);
    fit_table.push(vec![cfg.protocol.probe_u.into(), fit.slope.into(), fit.intercept.into(), fit.r_squared.into()]);

    let mut summary = Map::new();
    summary.insert("slope".into(), json!(fit.slope));
    summary.insert("intercept".into(), json!(fit.intercept));
    summary.insert("r_squared".into(), json!(fit.r_squared));
    summary.insert("probe_u".into(), json!(cfg.protocol.probe_u));

    let mut tables = vec![sweep, fit_table];
    // the U = 0 ground state is a pure condensate, so it anchors n = 1
    let last = family.len() - 1;
    if cfg.u_list[0] == 0.0 {
        match calibrate_condensate_probe(amps[0], amps[last], fractions[last]) {
            Ok(cal) => {
                let mut table = Table::new(
                    "calibration.csv",
                    &["U", "condensate_fraction", "amplitude_over_a", "n_estimated", "out_of_range"],
                );
                for ((m, n), a) in family.iter().zip(&fractions).zip(&amps) {
                    let est = cal.estimate(*a);
                    table.push(vec![
                        m.onsite_u.into(),
                        (*n).into(),
                        (*a).into(),
                        est.value.into(),
                        usize::from(est.out_of_range).into(),
                    ]);
                }
                tables.push(table);
            }
            Err(e) => log::warn!("no calibration table: {e}"),
        }
    }
    let width = (runs.len().max(1) - 1).to_string().len().max(2);
    for (k, (ts, _)) in runs.iter().enumerate() {
        tables.push(timeseries_table(format!("timeseries_{k:0width$}.csv"), ts));
    }
    Ok(RunResult { tables, summary })
}

fn ka_scenario(cfg: &ScenarioConfig) -> Result<RunResult, CliError> {
    let lat = &cfg.lattice;
    let basis = Arc::new(FockBasis::new(lat.n_atoms, lat.n_sites).map_err(CliError::numerical("building the basis"))?);
    let model = lat.model();
    let initial = initial_state(&cfg.initial, &basis, &model)?;
    let rows: Vec<(f64, f64, f64)> = cfg
        .ka_list
        .par_iter()
        .map(|&ka| {
            let p = core_protocol(&cfg.protocol, BoostSpec::ImprintGradient { ka }, lat.lattice_constant);
            let ts = run_quench(&basis, &model, &initial, &p)
                .map_err(CliError::numerical(format!("running the quench at ka = {ka}")))?;
            let omega = dominant_frequency(&ts.mean_x, p.dt_sample)
                .map_err(CliError::numerical(format!("extracting the frequency at ka = {ka}")))?;
            let eq7 =
                tb_frequency(ka, lat.hop_j, lat.n_sites).map_err(CliError::numerical("tight-binding frequency"))?;
            Ok((ka, omega, eq7))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new("ka_sweep.csv", &["ka_rad", "omega_extracted", "omega_eq7"]);
    let mut worst = 0.0f64;
    for &(ka, omega, eq7) in &rows {
        worst = worst.max((omega - eq7).abs() / eq7.abs());
        table.push(vec![ka.into(), omega.into(), eq7.into()]);
    }
    let mut summary = Map::new();
    summary.insert("max_relative_deviation".into(), json!(worst));
    Ok(RunResult { tables: vec![table], summary })
}

// ---------------------------------------------------------------------------
// single-particle bands

fn bands_scenario(cfg: &ScenarioConfig) -> Result<RunResult, CliError> {
    let b = cfg.bands.as_ref().expect("validated");
    let lattice = ContinuousLattice {
        v0: b.v0,
        period: b.period,
        n_cells: b.n_cells,
        boundary: b.boundary,
        points_per_period: b.points_per_period,
        mass: b.mass,
        hbar: b.hbar,
    };
    let (levels, disagreement) = match b.cross_check_tolerance {
        Some(tol) => cross_validated_spectrum(&lattice, b.n_levels, tol)
            .map(|(e, d)| (e, Some(d)))
            .map_err(CliError::numerical("solving the single-particle spectrum"))?,
        None => (
            solve_spectrum(&lattice, b.n_levels)
                .map_err(CliError::numerical("solving the single-particle spectrum"))?,
            None,
        ),
    };
    let band = match b.boundary {
        CellBoundary::Periodic => tunneling_from_band(&levels, b.band_sites),
        CellBoundary::HardWall => tunneling_from_open_band(&levels, b.band_sites),
    }
    .map_err(CliError::numerical("extracting the tunneling energy"))?;
    let e_r = recoil_energy(&lattice);
    // period of the two-site population oscillation, h/(2J)
    let two_site_period = PI * b.hbar / band.hop_j;

    let mut table = Table::new("bands.csv", &["level", "energy"]);
    for (k, e) in levels.iter().enumerate() {
        table.push(vec![k.into(), (*e).into()]);
    }
    let mut summary_table = Table::new(
        "band_summary.csv",
        &[
            "v0",
            "period",
            "n_cells",
            "boundary",
            "hop_j",
            "alpha",
            "band_fit_residual",
            "recoil_energy",
            "v0_over_recoil",
            "two_site_period",
            "fd_pw_disagreement",
        ],
    );
    summary_table.push(vec![
        b.v0.into(),
        b.period.into(),
        b.n_cells.into(),
        match b.boundary {
            CellBoundary::Periodic => "periodic",
            CellBoundary::HardWall => "hard_wall",
        }
        .into(),
        band.hop_j.into(),
        band.alpha.into(),
        band.band_fit_residual.into(),
        e_r.into(),
        (b.v0 / e_r).into(),
        two_site_period.into(),
        disagreement.into(),
    ]);
    let mut summary = Map::new();
    summary.insert("hop_j".into(), json!(band.hop_j));
    summary.insert("recoil_energy".into(), json!(e_r));
    summary.insert("two_site_period".into(), json!(two_site_period));
    if let Some(d) = disagreement {
        summary.insert("fd_pw_disagreement".into(), json!(d));
    }
    Ok(RunResult { tables: vec![table, summary_table], summary })
}

// ---------------------------------------------------------------------------
// metrology

pub fn gradiometer_params(spec: &GradiometerSpec) -> GradiometerParams {
    match spec.species {
        Species::Rb87 => GradiometerParams::rb87_gravity(spec.gradient, spec.lattice_constant),
        Species::Cr52 => GradiometerParams::cr52_magnetic(spec.gradient, spec.lattice_constant),
    }
}

/// One-row gradiometer report: inputs, required `sinθ·T`, the tilt time at
/// the configured angle, the phase it produces and an optional period estimate.
pub fn gradiometer_report(spec: &GradiometerSpec) -> Result<(Table, Map<String, Value>), CliError> {
    let params = gradiometer_params(spec);
    let product =
        required_tilt_product(&params, spec.target_phase).map_err(CliError::numerical("computing the tilt product"))?;
    let tilt_time = product / spec.tilt_angle.sin();
    let phase = gradiometer_phase(&params.with_tilt(spec.tilt_angle, tilt_time))
        .map_err(CliError::numerical("computing the gradiometer phase"))?;
    let period = spec
        .period
        .map(|(hz, sites, ka)| oscillation_period_estimate(PLANCK * hz, sites, ka).map(|t| (hz, sites, ka, t)))
        .transpose()
        .map_err(CliError::numerical("estimating the oscillation period"))?;

    let mut table = Table::new(
        "gradiometer.csv",
        &[
            "species",
            "charge",
            "gradient",
            "lattice_constant_m",
            "target_phase_rad",
            "required_sin_theta_t_s",
            "tilt_angle_rad",
            "tilt_time_s",
            "delta_phi_rad",
            "hop_j_hz",
            "n_sites",
            "ka_rad",
            "period_s",
        ],
    );
    let (hz, sites, ka, t) = match period {
        Some((hz, sites, ka, t)) => (Cell::Float(hz), Cell::from(sites), Cell::Float(ka), Cell::Float(t)),
        None => (Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty),
    };
    table.push(vec![
        spec.species.name().into(),
        params.charge.into(),
        spec.gradient.into(),
        spec.lattice_constant.into(),
        spec.target_phase.into(),
        product.into(),
        spec.tilt_angle.into(),
        tilt_time.into(),
        phase.into(),
        hz,
        sites,
        ka,
        t,
    ]);
    let mut summary = Map::new();
    summary.insert("required_sin_theta_t_s".into(), json!(product));
    if let Some((_, _, _, t)) = period {
        summary.insert("period_s".into(), json!(t));
    }
    Ok((table, summary))
}
