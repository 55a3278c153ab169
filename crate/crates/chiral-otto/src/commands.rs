//! Table-producing commands.
//!
//! Grid points are evaluated on a worker pool of `jobs` threads; rows are
//! always emitted in sweep order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use chiral_otto_core::correlations;
use chiral_otto_core::otto::{self, CycleMode, CycleSpec};
use chiral_otto_core::response::{FieldTag, SusceptibilityProbe};
use chiral_otto_core::semiclassical::{self, ScConfig};
use chiral_otto_core::{Error as CoreError, Spectrum};
use rayon::prelude::*;

use crate::config::{Command, Mode, Params, RunConfig};
use crate::error::{is_parameter_error, CliError, Result};
use crate::table::{Cell, Table};
use crate::validate;

/// A finished table and, for commands that report problems per row, the
/// failure to signal once the table has been written.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome { table, failure: None }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    log::info!("running {} over {} point(s) with {} job(s)", cfg.command.name(), cfg.points().len(), cfg.jobs);
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg).map(Outcome::ok),
        Command::Tangles => cmd_tangles(cfg).map(Outcome::ok),
        Command::Susceptibility => cmd_susceptibility(cfg).map(Outcome::ok),
        Command::Otto => cmd_otto(cfg),
        Command::Semiclassical => cmd_semiclassical(cfg).map(Outcome::ok),
        Command::Validate { perturb_energy } => cmd_validate(cfg, perturb_energy),
    }
}

/// Evaluates `f` at every grid point on the worker pool, keeping sweep order.
fn par_rows<F>(cfg: &RunConfig, f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&Params) -> Result<Vec<Vec<Cell>>> + Sync,
{
    let points = cfg.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Parameter(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    let blocks: Vec<Vec<Vec<Cell>>> = pool.install(|| points.par_iter().map(&f).collect::<Result<_>>())?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Leading columns naming the swept variables.
fn sweep_columns(cfg: &RunConfig) -> Vec<String> {
    cfg.sweeps.iter().map(|s| s.var.column()).collect()
}

fn sweep_cells(cfg: &RunConfig, p: &Params) -> Vec<Cell> {
    cfg.sweeps
        .iter()
        .map(|s| match s.var {
            crate::config::SweepVar::N => Cell::Int(p.n as i64),
            v => Cell::Num(p.get(v)),
        })
        .collect()
}

fn table_for(cfg: &RunConfig, columns: &[&str]) -> Table {
    let mut names = sweep_columns(cfg);
    names.extend(columns.iter().map(|c| c.to_string()));
    Table::new(cfg.meta(), names)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Table> {
    let mut table = table_for(cfg, &["level", "energy", "sz"]);
    table.rows = par_rows(cfg, |p| {
        let spec = Spectrum::from_params(&p.chain())?;
        let lead = sweep_cells(cfg, p);
        Ok(spec
            .energies()
            .iter()
            .zip(spec.sz_labels())
            .enumerate()
            .map(|(k, (&e, &sz))| {
                let mut row = lead.clone();
                row.extend([Cell::Int(k as i64), Cell::Num(e), Cell::Int(sz as i64)]);
                row
            })
            .collect())
    })?;
    Ok(table)
}

pub fn cmd_tangles(cfg: &RunConfig) -> Result<Table> {
    let max_r = cfg.points().iter().map(|p| p.n / 2).max().unwrap_or(1);
    let conc: Vec<String> = (1..=max_r).map(|r| format!("c_r{r}")).collect();
    let mut columns = vec!["tau1", "tau2"];
    columns.extend(conc.iter().map(String::as_str));
    columns.push("chirality");
    let mut table = table_for(cfg, &columns);
    table.rows = par_rows(cfg, |p| {
        let spec = Spectrum::from_params(&p.chain())?;
        let s = correlations::summarize(&spec, p.t)?;
        let mut row = sweep_cells(cfg, p);
        row.extend([Cell::Num(s.one_tangle), Cell::Num(s.two_tangle)]);
        row.extend((0..max_r).map(|r| s.concurrences.get(r).map_or(Cell::Empty, |&c| Cell::Num(c))));
        row.push(Cell::Num(s.chirality));
        Ok(vec![row])
    })?;
    Ok(table)
}

type ProbeKey = (usize, [u64; 4]);

/// Probes shared between grid points that differ only in temperature.
#[derive(Default)]
struct ProbeCache {
    probes: Mutex<HashMap<(ProbeKey, bool), Arc<SusceptibilityProbe>>>,
}

impl ProbeCache {
    fn get(&self, p: &Params, field: FieldTag) -> Result<Arc<SusceptibilityProbe>> {
        let key = ((p.n, [p.j1, p.j2, p.b_field, p.e_field].map(f64::to_bits)), field == FieldTag::Electric);
        if let Some(probe) = self.probes.lock().expect("probe cache poisoned").get(&key) {
            return Ok(probe.clone());
        }
        let probe = Arc::new(SusceptibilityProbe::new(&p.chain(), field)?);
        self.probes.lock().expect("probe cache poisoned").insert(key, probe.clone());
        Ok(probe)
    }
}

pub fn cmd_susceptibility(cfg: &RunConfig) -> Result<Table> {
    let mut table = table_for(cfg, &["chi_b", "chi_e"]);
    let cache = ProbeCache::default();
    table.rows = par_rows(cfg, |p| {
        let chi_b = cache.get(p, FieldTag::Magnetic)?.chi(p.t)?;
        let chi_e = cache.get(p, FieldTag::Electric)?.chi(p.t)?;
        let mut row = sweep_cells(cfg, p);
        row.extend([Cell::Num(chi_b), Cell::Num(chi_e)]);
        Ok(vec![row])
    })?;
    Ok(table)
}

fn cycle_spec(p: &Params, mode: Mode) -> CycleSpec {
    let mode = match mode {
        Mode::Quantum => CycleMode::QuantumAdiabatic,
        Mode::Thermo => CycleMode::ThermodynamicAdiabatic,
    };
    CycleSpec::new(p.chain(), p.t_hot, p.t_cold, p.e_field, p.e_field_low, mode)
}

pub fn cmd_otto(cfg: &RunConfig) -> Result<Outcome> {
    let columns = ["ratio", "carnot", "q_in", "q_out", "work", "eta", "regime", "tau2", "tau1", "status"];
    let mut table = table_for(cfg, &columns);
    let failures = Mutex::new(Vec::new());
    table.rows = par_rows(cfg, |p| {
        let spec = cycle_spec(p, cfg.mode);
        spec.validate()?;
        let hot = Spectrum::from_params(&p.chain())?;
        let rho = correlations::density_matrix(&chiral_otto_core::thermal::gibbs(&hot, p.t_hot)?)?;
        let (tau2, tau1) = (correlations::two_tangle(&rho)?, correlations::one_tangle(&rho)?);
        let mut row = sweep_cells(cfg, p);
        row.extend([Cell::Num(p.e_field / p.e_field_low), Cell::Num(spec.carnot())]);
        match otto::run_cycle(&spec) {
            Ok(r) => row.extend([
                Cell::Num(r.q_in),
                Cell::Num(r.q_out),
                Cell::Num(r.work),
                Cell::Num(r.efficiency),
                Cell::Text(r.regime.label().into()),
            ]),
            Err(e) if is_parameter_error(&e) => return Err(e.into()),
            Err(e) => {
                log::warn!("cycle at e-field {} failed: {e}", p.e_field);
                failures.lock().expect("failure list poisoned").push(e.clone());
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Text("failed".into())]);
                row.extend([Cell::Num(tau2), Cell::Num(tau1), Cell::Text(e.to_string())]);
                return Ok(vec![row]);
            }
        }
        row.extend([Cell::Num(tau2), Cell::Num(tau1), Cell::Text("ok".into())]);
        Ok(vec![row])
    })?;
    let failed = failures.into_inner().expect("failure list poisoned");
    let failure = (!failed.is_empty()).then(|| {
        let n = failed.len();
        let first = failed.into_iter().next().expect("non-empty");
        log::error!("{n} cycle(s) failed; first: {first}");
        CliError::Core(first)
    });
    Ok(Outcome { table, failure })
}

pub fn cmd_semiclassical(cfg: &RunConfig) -> Result<Table> {
    let columns = ["entropy_sc", "free_energy_sc", "correction_ratio", "entropy_negative", "perturbative", "eta_sc"];
    let mut table = table_for(cfg, &columns);
    table.rows = par_rows(cfg, |p| {
        if p.n != 4 || p.j2 != -p.j1 {
            return Err(CliError::Parameter(
                "the perturbative expansion covers only the four-site ring with j2 = -j1".into(),
            ));
        }
        let sc = ScConfig::new(p.j1, p.b_field)?;
        let v = semiclassical::validity(p.t, p.e_field, &sc)?;
        let eta = match semiclassical::efficiency_sc(p.t_cold, p.t_hot, p.e_field, p.e_field_low, &sc) {
            Ok(eta) => Cell::Num(eta),
            Err(CoreError::Degenerate(msg)) => {
                log::warn!("{msg}");
                Cell::Empty
            }
            Err(e) => return Err(e.into()),
        };
        let mut row = sweep_cells(cfg, p);
        row.extend([
            Cell::Num(semiclassical::entropy_sc(p.t, p.e_field, &sc)?),
            Cell::Num(semiclassical::free_energy_sc(p.t, p.e_field, &sc)?),
            Cell::Num(v.correction_ratio),
            Cell::Bool(v.entropy_negative),
            Cell::Bool(v.perturbative()),
            eta,
        ]);
        Ok(vec![row])
    })?;
    Ok(table)
}

pub fn cmd_validate(cfg: &RunConfig, perturb_energy: f64) -> Result<Outcome> {
    if !perturb_energy.is_finite() {
        return Err(CliError::Parameter("--perturb-energy must be finite".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Parameter(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    let reports =
        pool.install(|| validate::run_suite(&validate::SuiteOptions { perturb_energy, negative_control: true }));
    let mut table =
        Table::new(cfg.meta(), ["check", "max_deviation", "tolerance", "passed"].map(String::from).to_vec());
    for r in &reports {
        table.rows.push(vec![
            Cell::Text(r.name.into()),
            Cell::Num(r.max_dev),
            Cell::Num(r.tol),
            Cell::Bool(r.passed()),
        ]);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    let failure = (!failed.is_empty()).then(|| CliError::Validation(failed.join(", ")));
    Ok(Outcome { table, failure })
}
