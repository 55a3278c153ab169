//! Command-line flags, config files and the resolved run configuration.
//!
//! Every flag may also appear in a flat TOML config file under the same
//! name (`b-field = 1.0`, `sweep = ["t:1:100:100"]`). Flags win over the
//! file, and the file wins over the built-in defaults.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

use crate::error::{CliError, Result};
use crate::table::Cell;

#[derive(Debug, Parser)]
#[command(name = "chiral-otto", version, about = "Frustrated chiral spin rings as Otto engine working media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Subcommand)]
pub enum Command {
    /// Energies and magnetization labels of every level.
    Spectrum,
    /// One-tangle, two-tangle, concurrences by distance and chirality.
    Tangles,
    /// Magnetic and electric susceptibilities.
    Susceptibility,
    /// Otto cycle heats, work and efficiency.
    Otto,
    /// Perturbative entropy and efficiency of the four-site ring.
    Semiclassical,
    /// Run every closed-form versus numeric cross-check.
    Validate {
        /// Shift added to the numerically computed ground level before it
        /// is compared; any nonzero value should make the suite fail.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb_energy: f64,
    },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Tangles => "tangles",
            Command::Susceptibility => "susceptibility",
            Command::Otto => "otto",
            Command::Semiclassical => "semiclassical",
            Command::Validate { .. } => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quantum,
    Thermo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Quantum => "quantum",
            Mode::Thermo => "thermo",
        })
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Optional settings shared by the command line and config files.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Number of sites on the ring.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Nearest-neighbour exchange.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub j1: Option<f64>,

    /// Next-nearest-neighbour exchange.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub j2: Option<f64>,

    /// Magnetic field.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b_field: Option<f64>,

    /// Electric field; the hot-bath field of the Otto cycle.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub e_field: Option<f64>,

    /// Cold-bath electric field of the Otto cycle.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub e_field_low: Option<f64>,

    /// Temperature.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t_hot: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t_cold: Option<f64>,

    /// Adiabatic stroke: quantum keeps every level population fixed, thermo
    /// only forbids heat exchange.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,

    /// Grid over one variable, repeatable for a Cartesian product.
    #[arg(long, global = true, value_name = "VAR:START:STOP:COUNT")]
    #[serde(default, deserialize_with = "one_or_many")]
    pub sweep: Vec<String>,

    #[arg(long, global = true)]
    pub format: Option<Format>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads used for the sweep.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Flat TOML file with defaults for any of these flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

impl Flags {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|e| CliError::Parameter(format!("{}: {e}", path.display())))
    }

    /// Fills every unset field of `self` from `fallback`.
    pub fn or(self, fallback: Flags) -> Flags {
        Flags {
            n: self.n.or(fallback.n),
            j1: self.j1.or(fallback.j1),
            j2: self.j2.or(fallback.j2),
            b_field: self.b_field.or(fallback.b_field),
            e_field: self.e_field.or(fallback.e_field),
            e_field_low: self.e_field_low.or(fallback.e_field_low),
            t: self.t.or(fallback.t),
            t_hot: self.t_hot.or(fallback.t_hot),
            t_cold: self.t_cold.or(fallback.t_cold),
            mode: self.mode.or(fallback.mode),
            sweep: if self.sweep.is_empty() { fallback.sweep } else { self.sweep },
            format: self.format.or(fallback.format),
            out: self.out.or(fallback.out),
            jobs: self.jobs.or(fallback.jobs),
            config: self.config.or(fallback.config),
        }
    }
}

/// Variables a sweep may range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    N,
    J1,
    J2,
    BField,
    EField,
    EFieldLow,
    T,
    THot,
    TCold,
}

impl SweepVar {
    pub const ALL: [SweepVar; 9] = [
        SweepVar::N,
        SweepVar::J1,
        SweepVar::J2,
        SweepVar::BField,
        SweepVar::EField,
        SweepVar::EFieldLow,
        SweepVar::T,
        SweepVar::THot,
        SweepVar::TCold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::N => "n",
            SweepVar::J1 => "j1",
            SweepVar::J2 => "j2",
            SweepVar::BField => "b-field",
            SweepVar::EField => "e-field",
            SweepVar::EFieldLow => "e-field-low",
            SweepVar::T => "t",
            SweepVar::THot => "t-hot",
            SweepVar::TCold => "t-cold",
        }
    }

    /// Column name in output tables.
    pub fn column(self) -> String {
        self.name().replace('-', "_")
    }

    fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s || v.column() == s)
            .ok_or_else(|| CliError::Parameter(format!("unknown sweep variable '{s}'")))
    }
}

/// One swept variable and its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |why: &str| CliError::Parameter(format!("bad sweep '{spec}': {why}; expected VAR:START:STOP:COUNT"));
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(bad("need four fields"));
        }
        let var = SweepVar::parse(parts[0].trim())?;
        let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
        let start = num(parts[1]).ok_or_else(|| bad("start is not a finite number"))?;
        let stop = num(parts[2]).ok_or_else(|| bad("stop is not a finite number"))?;
        let count: usize = parts[3].trim().parse().map_err(|_| bad("count is not a positive integer"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        let sweep = Sweep { var, start, stop, count };
        if var == SweepVar::N && sweep.values().iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(bad("site counts must be non-negative integers"));
        }
        Ok(sweep)
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = self.count - 1;
        (0..self.count)
            .map(
                |k| {
                    if k == last {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * (k as f64 / last as f64)
                    }
                },
            )
            .collect()
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.var.name(), self.start, self.stop, self.count)
    }
}

/// Values of every physical parameter at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub n: usize,
    pub j1: f64,
    pub j2: f64,
    pub b_field: f64,
    pub e_field: f64,
    pub e_field_low: f64,
    pub t: f64,
    pub t_hot: f64,
    pub t_cold: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: 4,
            j1: 1.0,
            j2: -1.0,
            b_field: 1.0,
            e_field: 1.0,
            e_field_low: 3.5,
            t: 10.0,
            t_hot: 30.0,
            t_cold: 10.0,
        }
    }
}

impl Params {
    pub fn get(&self, var: SweepVar) -> f64 {
        match var {
            SweepVar::N => self.n as f64,
            SweepVar::J1 => self.j1,
            SweepVar::J2 => self.j2,
            SweepVar::BField => self.b_field,
            SweepVar::EField => self.e_field,
            SweepVar::EFieldLow => self.e_field_low,
            SweepVar::T => self.t,
            SweepVar::THot => self.t_hot,
            SweepVar::TCold => self.t_cold,
        }
    }

    pub fn set(&mut self, var: SweepVar, value: f64) {
        match var {
            SweepVar::N => self.n = value as usize,
            SweepVar::J1 => self.j1 = value,
            SweepVar::J2 => self.j2 = value,
            SweepVar::BField => self.b_field = value,
            SweepVar::EField => self.e_field = value,
            SweepVar::EFieldLow => self.e_field_low = value,
            SweepVar::T => self.t = value,
            SweepVar::THot => self.t_hot = value,
            SweepVar::TCold => self.t_cold = value,
        }
    }

    pub fn chain(&self) -> chiral_otto_core::ChainParams {
        chiral_otto_core::ChainParams::new(self.n)
            .with_exchange(self.j1, self.j2)
            .with_b(self.b_field)
            .with_e_field(self.e_field)
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub base: Params,
    pub mode: Mode,
    pub sweeps: Vec<Sweep>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    /// Merges the flags with the config file they name, if any.
    pub fn resolve(command: Command, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => Flags::from_file(path)?,
            None => Flags::default(),
        };
        Self::from_flags(command, flags.or(file))
    }

    pub fn from_flags(command: Command, flags: Flags) -> Result<Self> {
        let d = Params::default();
        let base = Params {
            n: flags.n.unwrap_or(d.n),
            j1: flags.j1.unwrap_or(d.j1),
            j2: flags.j2.unwrap_or(d.j2),
            b_field: flags.b_field.unwrap_or(d.b_field),
            e_field: flags.e_field.unwrap_or(d.e_field),
            e_field_low: flags.e_field_low.unwrap_or(d.e_field_low),
            t: flags.t.unwrap_or(d.t),
            t_hot: flags.t_hot.unwrap_or(d.t_hot),
            t_cold: flags.t_cold.unwrap_or(d.t_cold),
        };
        for var in SweepVar::ALL.into_iter().skip(1) {
            if !base.get(var).is_finite() {
                return Err(CliError::Parameter(format!("--{} must be finite", var.name())));
            }
        }
        let sweeps = flags.sweep.iter().map(|s| Sweep::parse(s)).collect::<Result<Vec<_>>>()?;
        for (i, s) in sweeps.iter().enumerate() {
            if sweeps[..i].iter().any(|o| o.var == s.var) {
                return Err(CliError::Parameter(format!("variable '{}' is swept twice", s.var.name())));
            }
        }
        let jobs = match flags.jobs {
            Some(0) => return Err(CliError::Parameter("--jobs must be at least 1".into())),
            Some(k) => k,
            None => std::thread::available_parallelism().map(|k| k.get()).unwrap_or(1),
        };
        Ok(RunConfig {
            command,
            base,
            mode: flags.mode.unwrap_or(Mode::Thermo),
            sweeps,
            format: flags.format.unwrap_or(Format::Csv),
            out: flags.out,
            jobs,
        })
    }

    /// Grid points in sweep order; the last sweep varies fastest.
    pub fn points(&self) -> Vec<Params> {
        let mut points = vec![self.base];
        for sweep in &self.sweeps {
            let values = sweep.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p;
                        q.set(sweep.var, v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Metadata echoing every setting that affects the numbers.
    pub fn meta(&self) -> Vec<(String, Cell)> {
        let mut meta = vec![
            ("program".to_string(), Cell::Text(format!("chiral-otto {}", env!("CARGO_PKG_VERSION")))),
            ("command".to_string(), Cell::Text(self.command.name().into())),
        ];
        for var in SweepVar::ALL {
            let cell = match var {
                SweepVar::N => Cell::Int(self.base.n as i64),
                _ => Cell::Num(self.base.get(var)),
            };
            meta.push((var.name().to_string(), cell));
        }
        meta.push(("mode".into(), Cell::Text(self.mode.to_string())));
        let sweeps: Vec<String> = self.sweeps.iter().map(Sweep::to_string).collect();
        meta.push(("sweep".into(), Cell::Text(sweeps.join(" "))));
        meta.push(("format".into(), Cell::Text(self.format.to_string())));
        if let Command::Validate { perturb_energy } = self.command {
            meta.push(("perturb-energy".into(), Cell::Num(perturb_energy)));
        }
        meta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_is_inclusive() {
        let s = Sweep::parse("e-field:3.5:35:64").unwrap();
        let v = s.values();
        assert_eq!(v.len(), 64);
        assert_eq!(v[0], 3.5);
        assert_eq!(v[63], 35.0);
        assert_eq!(Sweep::parse("t:2:9:1").unwrap().values(), vec![2.0]);
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        for bad in ["t:1:2", "t:1:2:0", "q:1:2:3", "n:4:5:3", "t:a:2:3", "t:1:inf:2"] {
            assert!(Sweep::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(Sweep::parse("b_field:0:1:2").unwrap().var, SweepVar::BField);
    }

    #[test]
    fn flags_override_file() {
        let file: Flags = toml::from_str("n = 6\nb-field = 2.0\nsweep = \"t:1:2:2\"\nmode = \"quantum\"").unwrap();
        let flags = Flags { n: Some(8), ..Flags::default() };
        let cfg = RunConfig::from_flags(Command::Tangles, flags.or(file)).unwrap();
        assert_eq!(cfg.base.n, 8);
        assert_eq!(cfg.base.b_field, 2.0);
        assert_eq!(cfg.mode, Mode::Quantum);
        assert_eq!(cfg.points().len(), 2);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<Flags>("bfield = 1.0").is_err());
    }

    #[test]
    fn points_form_a_product() {
        let flags = Flags { sweep: vec!["t:1:3:3".into(), "e-field:0:1:2".into()], ..Flags::default() };
        let pts = RunConfig::from_flags(Command::Tangles, flags).unwrap().points();
        let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p.t, p.e_field)).collect();
        assert_eq!(pairs, vec![(1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0), (3.0, 0.0), (3.0, 1.0)]);
    }

    #[test]
    fn duplicate_sweeps_are_rejected() {
        let flags = Flags { sweep: vec!["t:1:3:3".into(), "t:0:1:2".into()], ..Flags::default() };
        assert!(RunConfig::from_flags(Command::Tangles, flags).is_err());
    }
}
