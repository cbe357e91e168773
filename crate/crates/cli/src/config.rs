//! Scenario configuration files.
//!
//! The format is the `key = value` / `[section]` subset of TOML. Angles and
//! other numbers may be written as short arithmetic expressions in `pi`,
//! quoted as strings (`delta_phi = "pi/2"`). See `docs/config.md` for the
//! full grammar.

use std::f64::consts::PI;
use std::path::PathBuf;

use boostprobe_core::fock::{fock_dimension, DEFAULT_DIMENSION_CAP};
use boostprobe_core::model::{BoseHubbardModel, Boundary};
use boostprobe_core::singleparticle::{CellBoundary, MIN_POINTS_PER_PERIOD};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    DoubleWell,
    LatticeSweepN,
    LatticeInteracting,
    KaSweep,
    Bands,
    Gradiometer,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DoubleWell => "double_well",
            Self::LatticeSweepN => "lattice_sweep_n",
            Self::LatticeInteracting => "lattice_interacting",
            Self::KaSweep => "ka_sweep",
            Self::Bands => "bands",
            Self::Gradiometer => "gradiometer",
            Self::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "double_well" => Self::DoubleWell,
            "lattice_sweep_n" => Self::LatticeSweepN,
            "lattice_interacting" => Self::LatticeInteracting,
            "ka_sweep" => Self::KaSweep,
            "bands" => Self::Bands,
            "gradiometer" => Self::Gradiometer,
            "custom" => Self::Custom,
            _ => return None,
        })
    }

    fn uses_lattice(self) -> bool {
        !matches!(self, Self::Bands | Self::Gradiometer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n_atoms: usize,
    pub n_sites: usize,
    pub hop_j: f64,
    pub onsite_u: f64,
    pub boundary: Boundary,
    pub lattice_constant: f64,
    pub tilt_gamma: f64,
    pub site_energies: Vec<f64>,
}

impl LatticeSpec {
    pub fn model(&self) -> BoseHubbardModel {
        BoseHubbardModel::new(self.hop_j, self.onsite_u)
            .with_boundary(self.boundary)
            .with_lattice_constant(self.lattice_constant)
            .with_tilt(self.tilt_gamma)
            .with_site_energies(self.site_energies.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Superfluid,
    Mott(Vec<usize>),
    /// Ground state of the lattice model at its configured `onsite_u`.
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoostSpec {
    None,
    ImprintStep { delta_phi: f64 },
    ImprintGradient { ka: f64 },
    Tilt { delta_phi: f64, duration: f64 },
}

impl BoostSpec {
    /// Same boost kind with a different phase step (for phase sweeps).
    pub fn with_phase(self, phase: f64) -> Self {
        match self {
            Self::ImprintStep { .. } => Self::ImprintStep { delta_phi: phase },
            Self::ImprintGradient { .. } => Self::ImprintGradient { ka: phase },
            Self::Tilt { duration, .. } => Self::Tilt { delta_phi: phase, duration },
            Self::None => Self::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub boost: BoostSpec,
    pub probe_u: f64,
    pub total_time: f64,
    pub dt_sample: f64,
    pub tolerance: f64,
    pub smoothing_window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandsSpec {
    pub v0: f64,
    pub period: f64,
    pub n_cells: usize,
    pub boundary: CellBoundary,
    pub band_sites: usize,
    pub n_levels: usize,
    pub points_per_period: usize,
    pub mass: f64,
    pub hbar: f64,
    /// Agreement required between finite differences and plane waves
    /// (periodic lattices only).
    pub cross_check_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Rb87,
    Cr52,
}

impl Species {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rb87" => Some(Self::Rb87),
            "cr52" => Some(Self::Cr52),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rb87 => "rb87",
            Self::Cr52 => "cr52",
        }
    }

    /// Lattice constant (m) of the usual lattice for this species.
    pub fn default_lattice_constant(self) -> f64 {
        match self {
            Self::Rb87 => 390e-9,
            Self::Cr52 => 532e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradiometerSpec {
    pub species: Species,
    pub gradient: f64,
    pub lattice_constant: f64,
    pub target_phase: f64,
    pub tilt_angle: f64,
    /// Optional oscillation-period estimate: `(J/h in Hz, sites, ka)`.
    pub period: Option<(f64, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub name: String,
    pub lattice: LatticeSpec,
    pub initial: InitialSpec,
    pub protocol: ProtocolSpec,
    pub u_list: Vec<f64>,
    pub ka_list: Vec<f64>,
    pub phase_list: Vec<f64>,
    pub bands: Option<BandsSpec>,
    pub gradiometer: Option<GradiometerSpec>,
    pub output_dir: Option<PathBuf>,
    /// Reserved; every computation is deterministic.
    pub seed: u64,
    /// The configuration text as read.
    pub source: String,
}

// ---------------------------------------------------------------------------
// raw document

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Value(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    name: Option<String>,
    lattice: Option<RawLattice>,
    initial: Option<RawInitial>,
    protocol: Option<RawProtocol>,
    sweep: Option<RawSweep>,
    bands: Option<RawBands>,
    gradiometer: Option<RawGradiometer>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    n_atoms: Option<usize>,
    n_sites: Option<usize>,
    hop_j: Option<Num>,
    onsite_u: Option<Num>,
    boundary: Option<String>,
    lattice_constant: Option<Num>,
    tilt_gamma: Option<Num>,
    site_energies: Option<Vec<Num>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    state: Option<String>,
    filling: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    boost: Option<String>,
    delta_phi: Option<Num>,
    ka: Option<Num>,
    tilt_duration: Option<Num>,
    probe_u: Option<Num>,
    total_time: Option<Num>,
    dt_sample: Option<Num>,
    tolerance: Option<Num>,
    smoothing_window: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    onsite_u: Option<Vec<Num>>,
    ka: Option<Vec<Num>>,
    delta_phi: Option<Vec<Num>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBands {
    v0: Num,
    period: Num,
    n_cells: usize,
    boundary: Option<String>,
    band_sites: Option<usize>,
    n_levels: Option<usize>,
    points_per_period: Option<usize>,
    mass: Option<Num>,
    hbar: Option<Num>,
    cross_check_tolerance: Option<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGradiometer {
    species: String,
    gradient: Num,
    lattice_constant: Option<Num>,
    target_phase: Option<Num>,
    tilt_angle: Option<Num>,
    period_hop_hz: Option<Num>,
    period_sites: Option<usize>,
    period_ka: Option<Num>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// expressions

/// Evaluates `+ - * /`, parentheses, decimal numbers and `pi`.
pub fn eval_expr(text: &str) -> Result<f64, String> {
    let tokens = tokenize(text)?;
    let mut parser = ExprParser { tokens: &tokens, pos: 0 };
    let value = parser.sum()?;
    if parser.pos != tokens.len() {
        return Err(format!("unexpected `{}` in `{text}`", tokens[parser.pos]));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Op(char),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Number(v) => write!(f, "{v}"),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            tokens.push(Token::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let exponent_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let v = literal.parse::<f64>().map_err(|_| format!("bad number `{literal}`"))?;
            tokens.push(Token::Number(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" => tokens.push(Token::Number(PI)),
                _ => return Err(format!("unknown name `{word}` (only `pi` is defined)")),
            }
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    Ok(tokens)
}

struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.factor()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.factor()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Number(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.factor()
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(t) => Err(format!("unexpected `{t}`")),
            None => Err("expression ends early".into()),
        }
    }
}

// ---------------------------------------------------------------------------
// validation

/// Line-aware error construction for semantic checks.
struct Checker<'a> {
    source: &'a str,
}

impl Checker<'_> {
    /// 1-based line of `key` inside `[section]` (top level when `section` is empty).
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (n, raw) in self.source.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if let Some(rest) = line.strip_prefix('[') {
                current = rest.trim_end_matches(']').trim().to_string();
                if key.is_empty() && current == section {
                    return Some(n + 1);
                }
                continue;
            }
            if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(n + 1);
                    }
                }
            }
        }
        None
    }

    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> CliError {
        let key_path = match (section.is_empty(), key.is_empty()) {
            (true, _) => key.to_string(),
            (false, true) => format!("[{section}]"),
            (false, false) => format!("{section}.{key}"),
        };
        CliError::Config { line: self.line_of(section, key), key: key_path, message: message.into() }
    }

    fn num(&self, section: &str, key: &str, value: &Option<Num>, default: f64) -> Result<f64, CliError> {
        match value {
            None => Ok(default),
            Some(v) => self.value(section, key, v),
        }
    }

    fn value(&self, section: &str, key: &str, value: &Num) -> Result<f64, CliError> {
        let v = match value {
            Num::Value(v) => *v,
            Num::Expr(text) => eval_expr(text).map_err(|e| self.error(section, key, e))?,
        };
        if !v.is_finite() {
            return Err(self.error(section, key, "value must be finite"));
        }
        Ok(v)
    }

    fn list(&self, section: &str, key: &str, values: &Option<Vec<Num>>) -> Result<Vec<f64>, CliError> {
        values.iter().flatten().map(|v| self.value(section, key, v)).collect()
    }
}

impl ScenarioConfig {
    /// Parses and validates a configuration document.
    pub fn parse(source: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
            CliError::Config { line, key: String::new(), message: e.message().to_string() }
        })?;
        let ck = Checker { source };
        let kind = ScenarioKind::parse(&raw.scenario).ok_or_else(|| {
            ck.error(
                "",
                "scenario",
                format!(
                    "unknown scenario `{}` (expected double_well, lattice_sweep_n, lattice_interacting, \
                     ka_sweep, bands, gradiometer or custom)",
                    raw.scenario
                ),
            )
        })?;

        // sections that the scenario would silently ignore are rejected
        let present = [
            ("lattice", raw.lattice.is_some()),
            ("initial", raw.initial.is_some()),
            ("protocol", raw.protocol.is_some()),
            ("sweep", raw.sweep.is_some()),
            ("bands", raw.bands.is_some()),
            ("gradiometer", raw.gradiometer.is_some()),
        ];
        for (section, is_present) in present {
            let used = match section {
                "bands" => kind == ScenarioKind::Bands,
                "gradiometer" => kind == ScenarioKind::Gradiometer,
                _ => kind.uses_lattice(),
            };
            if is_present && !used {
                return Err(ck.error(section, "", format!("section is not used by scenario {}", kind.name())));
            }
        }

        let lattice = parse_lattice(&ck, kind, raw.lattice.unwrap_or_default())?;
        let initial = parse_initial(&ck, kind, &lattice, raw.initial.unwrap_or_default())?;
        let protocol = parse_protocol(&ck, kind, raw.protocol.unwrap_or_default())?;

        let sweep = raw.sweep.unwrap_or_default();
        let u_list = ck.list("sweep", "onsite_u", &sweep.onsite_u)?;
        let ka_list = ck.list("sweep", "ka", &sweep.ka)?;
        let phase_list = ck.list("sweep", "delta_phi", &sweep.delta_phi)?;
        match kind {
            ScenarioKind::LatticeSweepN | ScenarioKind::LatticeInteracting => {
                if u_list.len() < 2 {
                    return Err(ck.error("sweep", "onsite_u", "need at least two interaction values"));
                }
                if u_list.windows(2).any(|w| !(w[0] < w[1])) || u_list[0] < 0.0 {
                    return Err(ck.error("sweep", "onsite_u", "values must be >= 0 and strictly ascending"));
                }
            }
            ScenarioKind::KaSweep => {
                if ka_list.is_empty() {
                    return Err(ck.error("sweep", "ka", "ka_sweep needs a list of ka values"));
                }
                if ka_list.iter().any(|ka| !(*ka > 0.0 && *ka < PI)) {
                    return Err(ck.error("sweep", "ka", "every ka must lie in (0, pi)"));
                }
            }
            _ => {}
        }
        let misplaced = [
            (
                "onsite_u",
                !u_list.is_empty() && !matches!(kind, ScenarioKind::LatticeSweepN | ScenarioKind::LatticeInteracting),
            ),
            ("ka", !ka_list.is_empty() && kind != ScenarioKind::KaSweep),
            ("delta_phi", !phase_list.is_empty() && !matches!(kind, ScenarioKind::DoubleWell | ScenarioKind::Custom)),
        ];
        for (key, bad) in misplaced {
            if bad {
                return Err(ck.error("sweep", key, format!("not used by scenario {}", kind.name())));
            }
        }
        if !phase_list.is_empty() && protocol.boost == BoostSpec::None {
            return Err(ck.error("sweep", "delta_phi", "a phase sweep needs a boost"));
        }

        let bands = raw.bands.map(|b| parse_bands(&ck, b)).transpose()?;
        if kind == ScenarioKind::Bands && bands.is_none() {
            return Err(ck.error("bands", "", "scenario bands needs a [bands] section"));
        }
        let gradiometer = raw.gradiometer.map(|g| parse_gradiometer(&ck, g)).transpose()?;
        if kind == ScenarioKind::Gradiometer && gradiometer.is_none() {
            return Err(ck.error("gradiometer", "", "scenario gradiometer needs a [gradiometer] section"));
        }

        let output = raw.output.unwrap_or_default();
        Ok(Self {
            kind,
            name: raw.name.unwrap_or_else(|| kind.name().to_string()),
            lattice,
            initial,
            protocol,
            u_list,
            ka_list,
            phase_list,
            bands,
            gradiometer,
            output_dir: output.dir.map(PathBuf::from),
            seed: output.seed.unwrap_or(0),
            source: source.to_string(),
        })
    }
}

fn parse_lattice(ck: &Checker, kind: ScenarioKind, raw: RawLattice) -> Result<LatticeSpec, CliError> {
    let s = "lattice";
    let n_sites = raw.n_sites.unwrap_or(match kind {
        ScenarioKind::DoubleWell => 2,
        ScenarioKind::KaSweep => 32,
        _ => 5,
    });
    let n_atoms = raw.n_atoms.unwrap_or(match kind {
        ScenarioKind::DoubleWell => 2,
        ScenarioKind::KaSweep => 1,
        _ => n_sites,
    });
    if kind == ScenarioKind::DoubleWell && n_sites != 2 {
        return Err(ck.error(s, "n_sites", "a double well has exactly 2 sites"));
    }
    if n_sites < 2 {
        return Err(ck.error(s, "n_sites", "need at least 2 sites"));
    }
    if n_atoms < 1 {
        return Err(ck.error(s, "n_atoms", "need at least 1 atom"));
    }
    if kind.uses_lattice() && fock_dimension(n_atoms, n_sites) > DEFAULT_DIMENSION_CAP as u128 {
        return Err(ck.error(
            s,
            "n_sites",
            format!(
                "{n_atoms} atoms on {n_sites} sites span {} states, above the cap of {DEFAULT_DIMENSION_CAP}",
                fock_dimension(n_atoms, n_sites)
            ),
        ));
    }
    let hop_j = ck.num(s, "hop_j", &raw.hop_j, 1.0)?;
    if hop_j < 0.0 {
        return Err(ck.error(s, "hop_j", "must be >= 0"));
    }
    let boundary = match raw.boundary.as_deref() {
        None | Some("open") => Boundary::Open,
        Some("periodic") => Boundary::Periodic,
        Some(other) => return Err(ck.error(s, "boundary", format!("expected open or periodic, got `{other}`"))),
    };
    let lattice_constant = ck.num(s, "lattice_constant", &raw.lattice_constant, 1.0)?;
    if !(lattice_constant > 0.0) {
        return Err(ck.error(s, "lattice_constant", "must be > 0"));
    }
    let site_energies = ck.list(s, "site_energies", &raw.site_energies)?;
    if !site_energies.is_empty() && site_energies.len() != n_sites {
        return Err(ck.error(s, "site_energies", format!("need {n_sites} entries, got {}", site_energies.len())));
    }
    Ok(LatticeSpec {
        n_atoms,
        n_sites,
        hop_j,
        onsite_u: ck.num(s, "onsite_u", &raw.onsite_u, 0.0)?,
        boundary,
        lattice_constant,
        tilt_gamma: ck.num(s, "tilt_gamma", &raw.tilt_gamma, 0.0)?,
        site_energies,
    })
}

fn parse_initial(
    ck: &Checker,
    kind: ScenarioKind,
    lattice: &LatticeSpec,
    raw: RawInitial,
) -> Result<InitialSpec, CliError> {
    let s = "initial";
    let default = match kind {
        ScenarioKind::DoubleWell => "superfluid",
        _ => "ground",
    };
    let state = raw.state.as_deref().unwrap_or(default);
    let sweeping = matches!(kind, ScenarioKind::LatticeSweepN | ScenarioKind::LatticeInteracting);
    if sweeping && state != "ground" {
        return Err(ck.error(s, "state", "interaction sweeps start from ground states"));
    }
    if raw.filling.is_some() && state != "mott" {
        return Err(ck.error(s, "filling", "filling only applies to state = \"mott\""));
    }
    match state {
        "superfluid" => Ok(InitialSpec::Superfluid),
        "ground" => Ok(InitialSpec::Ground),
        "mott" => {
            let filling = match raw.filling {
                Some(f) => f,
                None => {
                    if !lattice.n_atoms.is_multiple_of(lattice.n_sites) {
                        return Err(ck.error(
                            s,
                            "state",
                            "uniform Mott filling needs n_atoms divisible by n_sites; give `filling`",
                        ));
                    }
                    vec![lattice.n_atoms / lattice.n_sites; lattice.n_sites]
                }
            };
            if filling.len() != lattice.n_sites || filling.iter().sum::<usize>() != lattice.n_atoms {
                return Err(ck.error(s, "filling", "need one entry per site summing to n_atoms"));
            }
            Ok(InitialSpec::Mott(filling))
        }
        other => Err(ck.error(s, "state", format!("expected superfluid, mott or ground, got `{other}`"))),
    }
}

fn parse_protocol(ck: &Checker, kind: ScenarioKind, raw: RawProtocol) -> Result<ProtocolSpec, CliError> {
    let s = "protocol";
    let default_boost = if kind == ScenarioKind::KaSweep { "imprint_gradient" } else { "imprint_step" };
    let boost_name = raw.boost.as_deref().unwrap_or(default_boost);
    if kind == ScenarioKind::KaSweep && boost_name != "imprint_gradient" {
        return Err(ck.error(s, "boost", "ka_sweep always uses imprint_gradient"));
    }
    let delta_phi = ck.num(s, "delta_phi", &raw.delta_phi, PI / 2.0)?;
    let boost = match boost_name {
        "none" => BoostSpec::None,
        "imprint_step" => BoostSpec::ImprintStep { delta_phi },
        "imprint_gradient" => BoostSpec::ImprintGradient { ka: ck.num(s, "ka", &raw.ka, PI / 2.0)? },
        "tilt" => {
            let duration = ck.num(s, "tilt_duration", &raw.tilt_duration, f64::NAN)?;
            if raw.tilt_duration.is_none() {
                return Err(ck.error(s, "boost", "a tilt boost needs tilt_duration"));
            }
            BoostSpec::Tilt { delta_phi, duration }
        }
        other => {
            return Err(ck.error(
                s,
                "boost",
                format!("expected none, imprint_step, imprint_gradient or tilt, got `{other}`"),
            ))
        }
    };
    let unused = [
        (
            "delta_phi",
            raw.delta_phi.is_some() && !matches!(boost, BoostSpec::ImprintStep { .. } | BoostSpec::Tilt { .. }),
        ),
        ("ka", raw.ka.is_some() && !matches!(boost, BoostSpec::ImprintGradient { .. })),
        ("tilt_duration", raw.tilt_duration.is_some() && !matches!(boost, BoostSpec::Tilt { .. })),
    ];
    for (key, bad) in unused {
        if bad {
            return Err(ck.error(s, key, format!("not used by boost {boost_name}")));
        }
    }
    if kind == ScenarioKind::KaSweep && raw.ka.is_some() {
        return Err(ck.error(s, "ka", "ka_sweep takes its values from [sweep] ka"));
    }

    let probe_default = if kind == ScenarioKind::LatticeInteracting { 0.1 } else { 0.0 };
    let probe_u = ck.num(s, "probe_u", &raw.probe_u, probe_default)?;
    if kind == ScenarioKind::LatticeInteracting && !(probe_u > 0.0) {
        return Err(ck.error(s, "probe_u", "lattice_interacting needs probe_u > 0"));
    }
    let total_time = ck.num(s, "total_time", &raw.total_time, 60.0)?;
    if !(total_time > 0.0) {
        return Err(ck.error(s, "total_time", "must be > 0"));
    }
    let dt_sample = ck.num(s, "dt_sample", &raw.dt_sample, 0.05)?;
    if !(dt_sample > 0.0 && dt_sample <= total_time) {
        return Err(ck.error(s, "dt_sample", "must lie in (0, total_time]"));
    }
    let tolerance = ck.num(s, "tolerance", &raw.tolerance, 1e-10)?;
    if !(tolerance > 0.0) {
        return Err(ck.error(s, "tolerance", "must be > 0"));
    }
    if let BoostSpec::Tilt { duration, .. } = boost {
        if !(duration > 0.0 && duration < total_time / 10.0) {
            return Err(ck.error(s, "tilt_duration", "must lie in (0, total_time/10)"));
        }
    }
    if let Some(w) = raw.smoothing_window {
        if w == 0 || w.is_multiple_of(2) {
            return Err(ck.error(s, "smoothing_window", "must be odd and >= 1"));
        }
        if w > (total_time / dt_sample) as usize + 1 {
            return Err(ck.error(s, "smoothing_window", "longer than the sampled record"));
        }
    }
    Ok(ProtocolSpec { boost, probe_u, total_time, dt_sample, tolerance, smoothing_window: raw.smoothing_window })
}

fn parse_bands(ck: &Checker, raw: RawBands) -> Result<BandsSpec, CliError> {
    let s = "bands";
    let boundary = match raw.boundary.as_deref() {
        None | Some("periodic") => CellBoundary::Periodic,
        Some("hard_wall") => CellBoundary::HardWall,
        Some(other) => return Err(ck.error(s, "boundary", format!("expected periodic or hard_wall, got `{other}`"))),
    };
    let period = ck.value(s, "period", &raw.period)?;
    if !(period > 0.0) {
        return Err(ck.error(s, "period", "must be > 0"));
    }
    if raw.n_cells == 0 {
        return Err(ck.error(s, "n_cells", "must be >= 1"));
    }
    let band_sites = raw.band_sites.unwrap_or(raw.n_cells);
    if band_sites < 2 {
        return Err(ck.error(s, "band_sites", "a band needs at least 2 levels"));
    }
    let n_levels = raw.n_levels.unwrap_or(band_sites + 1);
    if n_levels < band_sites {
        return Err(ck.error(s, "n_levels", "must be at least band_sites"));
    }
    let points_per_period = raw.points_per_period.unwrap_or(MIN_POINTS_PER_PERIOD);
    if points_per_period < MIN_POINTS_PER_PERIOD {
        return Err(ck.error(s, "points_per_period", format!("must be >= {MIN_POINTS_PER_PERIOD}")));
    }
    if n_levels > raw.n_cells * points_per_period - 1 {
        return Err(ck.error(s, "n_levels", "more levels than grid points"));
    }
    let mass = ck.num(s, "mass", &raw.mass, 1.0)?;
    let hbar = ck.num(s, "hbar", &raw.hbar, 1.0)?;
    if !(mass > 0.0 && hbar > 0.0) {
        return Err(ck.error(s, if mass > 0.0 { "hbar" } else { "mass" }, "must be > 0"));
    }
    let cross_check_tolerance = match (&raw.cross_check_tolerance, boundary) {
        (Some(_), CellBoundary::HardWall) => {
            return Err(ck.error(s, "cross_check_tolerance", "plane waves need periodic boundaries"))
        }
        (Some(v), _) => Some(ck.value(s, "cross_check_tolerance", v)?),
        (None, CellBoundary::Periodic) => Some(1e-5),
        (None, CellBoundary::HardWall) => None,
    };
    Ok(BandsSpec {
        v0: ck.value(s, "v0", &raw.v0)?,
        period,
        n_cells: raw.n_cells,
        boundary,
        band_sites,
        n_levels,
        points_per_period,
        mass,
        hbar,
        cross_check_tolerance,
    })
}

fn parse_gradiometer(ck: &Checker, raw: RawGradiometer) -> Result<GradiometerSpec, CliError> {
    let s = "gradiometer";
    let species = Species::parse(&raw.species)
        .ok_or_else(|| ck.error(s, "species", format!("expected rb87 or cr52, got `{}`", raw.species)))?;
    let gradient = ck.value(s, "gradient", &raw.gradient)?;
    if !(gradient > 0.0) {
        return Err(ck.error(s, "gradient", "must be > 0"));
    }
    let lattice_constant = ck.num(s, "lattice_constant", &raw.lattice_constant, species.default_lattice_constant())?;
    if !(lattice_constant > 0.0) {
        return Err(ck.error(s, "lattice_constant", "must be > 0"));
    }
    let tilt_angle = ck.num(s, "tilt_angle", &raw.tilt_angle, PI / 2.0)?;
    if !(tilt_angle > 0.0 && tilt_angle <= PI / 2.0) {
        return Err(ck.error(s, "tilt_angle", "must lie in (0, pi/2]"));
    }
    let period = match (&raw.period_hop_hz, raw.period_sites, &raw.period_ka) {
        (None, None, None) => None,
        (Some(j), Some(sites), ka) => {
            let j = ck.value(s, "period_hop_hz", j)?;
            if !(j > 0.0) {
                return Err(ck.error(s, "period_hop_hz", "must be > 0"));
            }
            if sites < 2 {
                return Err(ck.error(s, "period_sites", "must be >= 2"));
            }
            Some((j, sites, ck.num(s, "period_ka", ka, PI / 2.0)?))
        }
        _ => return Err(ck.error(s, "period_hop_hz", "period estimates need period_hop_hz and period_sites")),
    };
    Ok(GradiometerSpec {
        species,
        gradient,
        lattice_constant,
        target_phase: ck.num(s, "target_phase", &raw.target_phase, PI / 2.0)?,
        tilt_angle,
        period,
    })
}
