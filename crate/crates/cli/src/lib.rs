//! Scenario runner for momentum-boost simulations of bosons in 1D lattices.
//!
//! A scenario is described by a small `key = value` configuration file (see
//! `docs/config.md`); running it produces CSV tables and a `manifest.json`
//! with checksums. A set of presets ships with the binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::CliError;
pub use output::{RunManifest, Table};
pub use scenario::{execute, gradiometer_report, run_scenario, RunResult};

/// A configuration shipped with the binary.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    /// Figure the preset reproduces.
    pub figure: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

macro_rules! preset {
    ($name:literal, $figure:literal, $description:literal) => {
        Preset {
            name: $name,
            figure: $figure,
            description: $description,
            source: include_str!(concat!("../presets/", $name, ".conf")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig1-imprint", "fig. 1", "double well, condensed pair, pi/2 phase step"),
    preset!("fig1-mott", "fig. 1", "double well, one atom per well, pi/2 phase step"),
    preset!("fig1-tilt", "fig. 1", "double well, pi/2 step delivered by a tilt pulse"),
    preset!("fig1-gradient", "fig. 1", "5 sites, condensed, uniform phase gradient ka = pi/2"),
    preset!("fig1-phase-sweep", "fig. 1", "double-well amplitude against imprinted phase"),
    preset!("fig2-sweep", "fig. 2", "amplitude vs condensate fraction, M = N = 2"),
    preset!("fig3-sweep", "fig. 3", "amplitude vs condensate fraction, M = N = 5"),
    preset!("fig33-interacting", "fig. 33", "M = N = 5 sweep with probe U = 0.1"),
    preset!("fig4b-ka-sweep", "fig. 4(b)", "frequency vs ka, one atom, 32 sites"),
    preset!("bands-v0-25", "-", "band and J of 25 cos^2(pi x), 32-cell ring"),
    preset!("bands-double-well", "-", "J of a hard-wall double well, V0 = 2, a = 5"),
    preset!("rb87-gravity", "-", "Rb-87 gravimeter tilt time and period estimate"),
    preset!("cr52-magnetic", "-", "Cr-52 magnetic gradiometer tilt time"),
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Fixed-width table of the shipped presets.
pub fn list_presets() -> String {
    let name_w = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0).max(4);
    let fig_w = PRESETS.iter().map(|p| p.figure.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<name_w$}  {:<fig_w$}  description\n", "name", "figure");
    for p in PRESETS {
        out.push_str(&format!("{:<name_w$}  {:<fig_w$}  {}\n", p.name, p.figure, p.description));
    }
    out
}
