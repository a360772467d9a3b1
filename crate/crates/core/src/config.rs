//! Run configuration: flat `key=value` text with dotted keys.
//!
//! ```text
//! mass = 1.0
//! basis.N = 40
//! potential.V.preset = gaussian
//! potential.V.height = 2.0
//! ```
//!
//! `#` starts a comment. Unknown keys are errors. [`RunConfig::to_text`]
//! writes every key with defaults resolved and parses back to an equal value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::basis::{default_quadrature_order, BasisParams, MiddleBasisKind};
use crate::error::{Error, Result};
use crate::potential::{CubicSpline, Parity, ParityDecl, PotentialSpec, Profile};
use crate::scattering::{Method, PathChoice, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sweep,
    Plateau,
    Validate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelConfig {
    Zero,
    Gaussian { height: f64, width: f64, center: f64 },
    OddGaussian { height: f64, width: f64, center: f64 },
    Square { height: f64, half_width: f64, center: f64 },
    SmoothedStep { height: f64, half_width: f64, edge: f64, center: f64 },
    Table { file: PathBuf },
}

impl ChannelConfig {
    fn preset(&self) -> &'static str {
        match self {
            ChannelConfig::Zero => "zero",
            ChannelConfig::Gaussian { .. } => "gaussian",
            ChannelConfig::OddGaussian { .. } => "odd_gaussian",
            ChannelConfig::Square { .. } => "square",
            ChannelConfig::SmoothedStep { .. } => "smoothed_step",
            ChannelConfig::Table { .. } => "table",
        }
    }

    pub fn profile(&self) -> Result<Profile> {
        Ok(match *self {
            ChannelConfig::Zero => Profile::Zero,
            ChannelConfig::Gaussian { height, width, center } => Profile::Gaussian { height, width, center },
            ChannelConfig::OddGaussian { height, width, center } => Profile::OddGaussian { height, width, center },
            ChannelConfig::Square {
                height,
                half_width,
                center,
            } => Profile::SquareBarrier {
                height,
                half_width,
                center,
            },
            ChannelConfig::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            } => Profile::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            },
            ChannelConfig::Table { ref file } => Profile::Tabulated(Arc::new(CubicSpline::from_file(file)?)),
        })
    }

    fn write(&self, out: &mut String, name: &str) {
        let p = format!("potential.{name}");
        let _ = writeln!(out, "{p}.preset = {}", self.preset());
        let mut kv = |k: &str, v: f64| {
            let _ = writeln!(out, "{p}.{k} = {v:?}");
        };
        match *self {
            ChannelConfig::Zero => {}
            ChannelConfig::Gaussian { height, width, center } | ChannelConfig::OddGaussian { height, width, center } => {
                kv("height", height);
                kv("width", width);
                kv("center", center);
            }
            ChannelConfig::Square {
                height,
                half_width,
                center,
            } => {
                kv("height", height);
                kv("half_width", half_width);
                kv("center", center);
            }
            ChannelConfig::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            } => {
                kv("height", height);
                kv("half_width", half_width);
                kv("edge", edge);
                kv("center", center);
            }
            ChannelConfig::Table { ref file } => {
                let _ = writeln!(out, "{p}.file = {}", file.display());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub mass: f64,
    pub output: Option<PathBuf>,
    pub lambda: f64,
    pub tau: Option<f64>,
    pub size: usize,
    pub quadrature: usize,
    pub energy_min: f64,
    pub energy_max: f64,
    pub energy_steps: usize,
    pub v: ChannelConfig,
    pub s: ChannelConfig,
    pub u: ChannelConfig,
    pub range: Option<f64>,
    pub parity: ParityDecl,
    pub method: Method,
    pub tail_correction: bool,
    pub tail_length: Option<usize>,
    pub path: PathChoice,
    pub plateau_energy: f64,
    pub plateau_lambda_min: f64,
    pub plateau_lambda_max: f64,
    pub plateau_lambda_steps: usize,
    pub plateau_taus: Vec<f64>,
    pub plateau_sizes: Vec<usize>,
    pub plateau_tolerance: f64,
    pub oracle_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Sweep,
            mass: 1.0,
            output: None,
            lambda: 1.5,
            tau: None,
            size: 40,
            quadrature: default_quadrature_order(40),
            energy_min: 1.1,
            energy_max: 3.0,
            energy_steps: 50,
            v: ChannelConfig::Zero,
            s: ChannelConfig::Zero,
            u: ChannelConfig::Zero,
            range: None,
            parity: ParityDecl::Auto,
            method: Method::Dressed,
            tail_correction: true,
            tail_length: None,
            path: PathChoice::Auto,
            plateau_energy: 1.5,
            plateau_lambda_min: 0.5,
            plateau_lambda_max: 3.0,
            plateau_lambda_steps: 26,
            plateau_taus: vec![1.0],
            plateau_sizes: vec![20, 40],
            plateau_tolerance: 1e-4,
            oracle_tolerance: 1e-12,
        }
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_error(line, format!("expected key = value, got {content:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(config_error(line, "empty key"));
            }
            if map.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(config_error(line, format!("duplicate key {key}")));
            }
        }
        Ok(Self { map })
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<(usize, T)>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(|x| Some((line, x)))
                .map_err(|_| config_error(line, format!("{key}: cannot parse {v:?}"))),
        }
    }

    fn value<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.take(key)?.map_or(default, |(_, v)| v))
    }

    fn list<T: FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.map.remove(key) {
            None => Ok(default),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|_| config_error(line, format!("{key}: cannot parse list item {s:?}")))
                })
                .collect(),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(l, _)| *l)
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn channel(entries: &mut Entries, name: &str, base: &Path) -> Result<ChannelConfig> {
    let p = format!("potential.{name}");
    let preset_line = entries.line_of(&format!("{p}.preset"));
    let preset = entries
        .take_raw(&format!("{p}.preset"))
        .map_or_else(|| "zero".to_string(), |(_, v)| v);
    let key = |k: &str| format!("{p}.{k}");
    let c = match preset.as_str() {
        "zero" => ChannelConfig::Zero,
        "gaussian" | "odd_gaussian" => {
            let height = entries.value(&key("height"), 1.0)?;
            let width = entries.value(&key("width"), 1.0)?;
            let center = entries.value(&key("center"), 0.0)?;
            if preset == "gaussian" {
                ChannelConfig::Gaussian { height, width, center }
            } else {
                ChannelConfig::OddGaussian { height, width, center }
            }
        }
        "square" => ChannelConfig::Square {
            height: entries.value(&key("height"), 1.0)?,
            half_width: entries.value(&key("half_width"), 1.0)?,
            center: entries.value(&key("center"), 0.0)?,
        },
        "smoothed_step" => ChannelConfig::SmoothedStep {
            height: entries.value(&key("height"), 1.0)?,
            half_width: entries.value(&key("half_width"), 1.0)?,
            edge: entries.value(&key("edge"), 0.1)?,
            center: entries.value(&key("center"), 0.0)?,
        },
        "table" => {
            let Some((line, file)) = entries.take_raw(&key("file")) else {
                return Err(config_error(preset_line, format!("{p}: preset table needs {p}.file")));
            };
            let file = base.join(file);
            CubicSpline::from_file(&file).map_err(|e| config_error(line, format!("{}: {e}", file.display())))?;
            ChannelConfig::Table { file }
        }
        other => return Err(config_error(preset_line, format!("{p}.preset: unknown preset {other:?}"))),
    };
    if let Some(width) = match c {
        ChannelConfig::Gaussian { width, .. } | ChannelConfig::OddGaussian { width, .. } => Some(width),
        ChannelConfig::Square { half_width, .. } | ChannelConfig::SmoothedStep { half_width, .. } => Some(half_width),
        _ => None,
    } {
        if !(width > 0.0) {
            return Err(config_error(preset_line, format!("{p}: width must be positive")));
        }
    }
    if let ChannelConfig::SmoothedStep { edge, .. } = c {
        if !(edge > 0.0) {
            return Err(config_error(preset_line, format!("{p}.edge must be positive")));
        }
    }
    Ok(c)
}

fn parse_enum<T>(entries: &mut Entries, key: &str, default: T, options: &[(&str, T)]) -> Result<T>
where
    T: Copy,
{
    match entries.take_raw(key) {
        None => Ok(default),
        Some((line, v)) => options.iter().find(|(n, _)| *n == v).map(|&(_, t)| t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            config_error(line, format!("{key}: expected one of {}, got {v:?}", names.join(", ")))
        }),
    }
}

const MODES: [(&str, Mode); 3] = [("sweep", Mode::Sweep), ("plateau", Mode::Plateau), ("validate", Mode::Validate)];
const METHODS: [(&str, Method); 2] = [("dressed", Method::Dressed), ("literal", Method::Literal)];
const PATHS: [(&str, PathChoice); 3] = [
    ("auto", PathChoice::Auto),
    ("coupled", PathChoice::Coupled),
    ("decoupled", PathChoice::Decoupled),
];
const PARITIES: [(&str, ParityDecl); 4] = [
    ("auto", ParityDecl::Auto),
    ("even", ParityDecl::Declared(Parity::Even)),
    ("odd", ParityDecl::Declared(Parity::Odd)),
    ("none", ParityDecl::Declared(Parity::None)),
];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], t: T) -> &'static str {
    options.iter().find(|(_, x)| *x == t).map_or("?", |(n, _)| n)
}

impl RunConfig {
    /// Parses configuration text; relative table paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let d = RunConfig::default();
        let mode = parse_enum(&mut e, "mode", d.mode, &MODES)?;
        let mass = e.value("mass", d.mass)?;
        let output = e.take_raw("output").map(|(_, v)| PathBuf::from(v));
        let lambda = e.value("basis.lambda", d.lambda)?;
        let tau = e.take::<f64>("basis.tau")?.map(|(_, t)| t);
        let size = e.value("basis.N", d.size)?;
        let quadrature = e.value("basis.K", default_quadrature_order(size))?;
        let energy_min = e.value("energy.min", d.energy_min)?;
        let energy_max = e.value("energy.max", d.energy_max)?;
        let energy_steps = e.value("energy.steps", d.energy_steps)?;
        let v = channel(&mut e, "V", base)?;
        let s = channel(&mut e, "S", base)?;
        let u = channel(&mut e, "U", base)?;
        let range = e.take::<f64>("potential.range")?.map(|(_, r)| r);
        let parity = parse_enum(&mut e, "potential.parity", d.parity, &PARITIES)?;
        let method = parse_enum(&mut e, "solver.method", d.method, &METHODS)?;
        let tail_correction = e.value("solver.tail_correction", d.tail_correction)?;
        let tail_length = e.take::<usize>("solver.tail_length")?.map(|(_, l)| l);
        let path = parse_enum(&mut e, "solver.path", d.path, &PATHS)?;
        let plateau_energy = e.value("plateau.energy", d.plateau_energy)?;
        let plateau_lambda_min = e.value("plateau.lambda_min", d.plateau_lambda_min)?;
        let plateau_lambda_max = e.value("plateau.lambda_max", d.plateau_lambda_max)?;
        let plateau_lambda_steps = e.value("plateau.lambda_steps", d.plateau_lambda_steps)?;
        let plateau_taus = e.list("plateau.tau", d.plateau_taus)?;
        let plateau_sizes = e.list("plateau.N", d.plateau_sizes)?;
        let plateau_tolerance = e.value("plateau.tolerance", d.plateau_tolerance)?;
        let oracle_tolerance = e.value("oracle.tolerance", d.oracle_tolerance)?;
        if let Some((key, (line, _))) = e.map.iter().next() {
            return Err(config_error(*line, format!("unknown key {key}")));
        }
        let config = Self {
            mode,
            mass,
            output,
            lambda,
            tau,
            size,
            quadrature,
            energy_min,
            energy_max,
            energy_steps,
            v,
            s,
            u,
            range,
            parity,
            method,
            tail_correction,
            tail_length,
            path,
            plateau_energy,
            plateau_lambda_min,
            plateau_lambda_max,
            plateau_lambda_steps,
            plateau_taus,
            plateau_sizes,
            plateau_tolerance,
            oracle_tolerance,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Reads the configuration echoed as `# key = value` lines at the top of
    /// an output file.
    pub fn from_header(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| l.contains('='))
            .map(|l| format!("{l}\n"))
            .collect();
        Self::parse(&body, Path::new(""))
    }

    fn validate(&self) -> Result<()> {
        let err = |m: String| Err(config_error(0, m));
        if !(self.mass >= 0.0) {
            return err(format!("mass must be nonnegative, got {}", self.mass));
        }
        if !(self.energy_min > self.mass) {
            return err(format!("energy.min = {} must exceed the mass {}", self.energy_min, self.mass));
        }
        if self.energy_steps == 0 {
            return err("energy.steps must be at least 1".into());
        }
        if self.energy_steps > 1 && !(self.energy_max >= self.energy_min) {
            return err("energy.max must not be below energy.min".into());
        }
        if !(self.plateau_energy > self.mass) {
            return err("plateau.energy must exceed the mass".into());
        }
        if self.plateau_lambda_steps == 0 || !(self.plateau_lambda_min > 0.0) || !(self.plateau_lambda_max >= self.plateau_lambda_min) {
            return err("plateau lambda grid must be positive and ordered with at least one step".into());
        }
        if self.plateau_sizes.is_empty() || self.plateau_taus.is_empty() {
            return err("plateau.N and plateau.tau must be non-empty".into());
        }
        if !(self.oracle_tolerance > 0.0) || !(self.plateau_tolerance > 0.0) {
            return err("tolerances must be positive".into());
        }
        if let Some(r) = self.range {
            if !(r > 0.0) {
                return err("potential.range must be positive".into());
            }
        }
        self.basis_params()
            .map_err(|e| config_error(0, e.to_string()))
            .map(|_| ())
    }

    pub fn basis_kind(&self) -> MiddleBasisKind {
        match self.tau {
            Some(tau) => MiddleBasisKind::KineticBalance { tau },
            None => MiddleBasisKind::Spinor,
        }
    }

    pub fn basis_params(&self) -> Result<BasisParams> {
        BasisParams::with_quadrature(self.lambda, self.size, self.quadrature, self.basis_kind())
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        let mut spec = PotentialSpec::new(self.v.profile()?, self.s.profile()?, self.u.profile()?).with_parity(self.parity);
        if let Some(r) = self.range {
            spec = spec.with_range(r);
        }
        Ok(spec)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            method: self.method,
            tail_correction: self.tail_correction,
            tail_length: self.tail_length,
            tail_quadrature: None,
            path: self.path,
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        grid(self.energy_min, self.energy_max, self.energy_steps)
    }

    pub fn plateau_scales(&self) -> Vec<f64> {
        grid(self.plateau_lambda_min, self.plateau_lambda_max, self.plateau_lambda_steps)
    }

    /// Every key with defaults resolved.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("mode", name_of(&MODES, self.mode).into());
        line("mass", format!("{:?}", self.mass));
        if let Some(o) = &self.output {
            line("output", o.display().to_string());
        }
        line("basis.lambda", format!("{:?}", self.lambda));
        if let Some(t) = self.tau {
            line("basis.tau", format!("{t:?}"));
        }
        line("basis.N", self.size.to_string());
        line("basis.K", self.quadrature.to_string());
        line("energy.min", format!("{:?}", self.energy_min));
        line("energy.max", format!("{:?}", self.energy_max));
        line("energy.steps", self.energy_steps.to_string());
        if let Some(r) = self.range {
            line("potential.range", format!("{r:?}"));
        }
        line("potential.parity", name_of(&PARITIES, self.parity).into());
        line("solver.method", name_of(&METHODS, self.method).into());
        line("solver.tail_correction", self.tail_correction.to_string());
        if let Some(l) = self.tail_length {
            line("solver.tail_length", l.to_string());
        }
        line("solver.path", name_of(&PATHS, self.path).into());
        line("plateau.energy", format!("{:?}", self.plateau_energy));
        line("plateau.lambda_min", format!("{:?}", self.plateau_lambda_min));
        line("plateau.lambda_max", format!("{:?}", self.plateau_lambda_max));
        line("plateau.lambda_steps", self.plateau_lambda_steps.to_string());
        line(
            "plateau.tau",
            self.plateau_taus.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(","),
        );
        line(
            "plateau.N",
            self.plateau_sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        line("plateau.tolerance", format!("{:?}", self.plateau_tolerance));
        line("oracle.tolerance", format!("{:?}", self.oracle_tolerance));
        self.v.write(&mut out, "V");
        self.s.write(&mut out, "S");
        self.u.write(&mut out, "U");
        out
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}
