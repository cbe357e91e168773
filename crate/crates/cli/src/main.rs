use std::path::PathBuf;
use std::process::ExitCode;

use boostprobe::config::{eval_expr, ScenarioConfig};
use boostprobe::{execute, find_preset, gradiometer_report, list_presets, CliError, PRESETS};
use clap::{Parser, Subcommand, ValueEnum};

/// Caps the worker threads used by sweeps and the band solver.
const THREADS_VAR: &str = "BOOSTPROBE_THREADS";

#[derive(Parser)]
#[command(name = "boostprobe", version, about = "Momentum-boost probes of condensate fraction in 1D lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario configuration file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the shipped presets.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the shipped presets.
    ListPresets,
    /// Tilt time needed for a target phase; prints a CSV row.
    Gradiometer {
        #[arg(long, value_enum)]
        species: SpeciesArg,
        /// Gradient: m/s² for rb87, T/m for cr52. Expressions in `pi` allowed.
        #[arg(long)]
        gradient: String,
        /// Target phase step (rad), e.g. `pi/2`.
        #[arg(long)]
        target_phase: String,
        /// Lattice constant (m); defaults to the species' usual lattice.
        #[arg(long)]
        lattice_constant: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeciesArg {
    Rb87,
    Cr52,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot configure {n} threads: {e}")))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Io { context: format!("reading {}", config.display()), source: e })?;
            run(&ScenarioConfig::parse(&text)?, out)
        }
        Command::Preset { name, out } => {
            let preset = find_preset(&name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                CliError::Validation(format!("unknown preset `{name}`; available: {}", names.join(", ")))
            })?;
            run(&ScenarioConfig::parse(preset.source)?, out)
        }
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(())
        }
        Command::Gradiometer { species, gradient, target_phase, lattice_constant } => {
            let number =
                |flag: &str, text: &str| eval_expr(text).map_err(|e| CliError::Validation(format!("--{flag}: {e}")));
            let species = match species {
                SpeciesArg::Rb87 => "rb87",
                SpeciesArg::Cr52 => "cr52",
            };
            // route through the config parser so the same checks apply
            let mut text = format!(
                "scenario = \"gradiometer\"\n[gradiometer]\nspecies = \"{species}\"\ngradient = {:?}\ntarget_phase = {:?}\n",
                number("gradient", &gradient)?,
                number("target-phase", &target_phase)?,
            );
            if let Some(a) = lattice_constant {
                text.push_str(&format!("lattice_constant = {:?}\n", number("lattice-constant", &a)?));
            }
            let cfg = ScenarioConfig::parse(&text)?;
            let (table, _) = gradiometer_report(cfg.gradiometer.as_ref().expect("gradiometer section"))?;
            let csv = table.to_csv()?;
            print!("{}", String::from_utf8_lossy(&csv));
            Ok(())
        }
    }
}

fn run(cfg: &ScenarioConfig, out: Option<PathBuf>) -> Result<(), CliError> {
    let (manifest, dir) = execute(cfg, out.as_deref())?;
    println!("{} ({}) -> {}", manifest.name, manifest.scenario, dir.display());
    for record in &manifest.outputs {
        println!("  {:<24} {:>6} rows  sha256 {}", record.file, record.rows, &record.sha256[..16]);
    }
    if let serde_json::Value::Object(summary) = &manifest.summary {
        for (key, value) in summary {
            println!("  {key} = {value}");
        }
    }
    Ok(())
}
