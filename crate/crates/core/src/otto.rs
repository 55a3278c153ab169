//! Otto cycle driven by the electric field between two heat baths.
//!
//! The hot isochore equilibrates the chain at `(t_hot, p_high)`, the cold one
//! at `(t_cold, p_low)`; the two adiabats change only the field.

use alloc::format;
use alloc::vec::Vec;

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::correlations;
use crate::error::{invalid, Error, Result};
use crate::model::ChainParams;
use crate::spectra::{self, LevelMap, Spectrum};
use crate::thermal;

/// Largest ring accepted by the size sweep.
pub const MAX_SCALING_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleMode {
    /// Every level keeps its population along the adiabats; levels are
    /// identified by continuation in the field.
    QuantumAdiabatic,
    /// Only heat exchange is forbidden along the adiabats; both field values
    /// are sampled by the two baths.
    ThermodynamicAdiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSpec {
    /// Chain configuration; its `e_field` is ignored.
    pub params: ChainParams,
    pub t_hot: f64,
    pub t_cold: f64,
    /// Field during contact with the hot bath.
    pub p_high: f64,
    /// Field during contact with the cold bath.
    pub p_low: f64,
    pub mode: CycleMode,
    /// Continuation resolution for the quantum-adiabatic mode.
    pub steps_per_unit: usize,
}

impl CycleSpec {
    pub fn new(params: ChainParams, t_hot: f64, t_cold: f64, p_high: f64, p_low: f64, mode: CycleMode) -> Self {
        Self { params, t_hot, t_cold, p_high, p_low, mode, steps_per_unit: spectra::STEPS_PER_UNIT }
    }

    pub fn with_mode(mut self, mode: CycleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_p_high(mut self, p: f64) -> Self {
        self.p_high = p;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.params.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.with_e_field(0.0).validate()?;
        if !(self.t_cold > 0.0 && self.t_hot > self.t_cold && self.t_hot.is_finite()) {
            return Err(invalid(format!(
                "bath temperatures must satisfy t_hot > t_cold > 0, got {} and {}",
                self.t_hot, self.t_cold
            )));
        }
        for (name, v) in [("p_high", self.p_high), ("p_low", self.p_low)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be a finite non-negative field, got {v}")));
            }
        }
        if self.steps_per_unit == 0 {
            return Err(invalid("continuation needs at least one step per unit field"));
        }
        Ok(())
    }

    pub fn carnot(&self) -> f64 {
        1.0 - self.t_cold / self.t_hot
    }
}

/// How a cycle behaves thermodynamically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Absorbs heat from the hot bath and delivers work.
    Engine,
    /// `q_in <= 0`: no heat is drawn from the hot bath.
    NoHeatIntake,
    /// `q_in > 0` but the work output is negative.
    NegativeWork,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Engine => "engine",
            Regime::NoHeatIntake => "no_heat_intake",
            Regime::NegativeWork => "negative_work",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    pub q_in: f64,
    pub q_out: f64,
    /// `q_in - q_out`.
    pub work: f64,
    /// `work / q_in`; NaN when `q_in == 0`.
    pub efficiency: f64,
    pub carnot: f64,
    pub regime: Regime,
}

impl CycleResult {
    fn from_heats(q_in: f64, q_out: f64, carnot: f64) -> Self {
        let work = q_in - q_out;
        let efficiency = if q_in != 0.0 { work / q_in } else { f64::NAN };
        let regime = if q_in <= 0.0 {
            Regime::NoHeatIntake
        } else if work < 0.0 {
            Regime::NegativeWork
        } else {
            Regime::Engine
        };
        Self { q_in, q_out, work, efficiency, carnot, regime }
    }

    pub fn is_engine(&self) -> bool {
        self.regime == Regime::Engine
    }
}

/// Heats of one cycle from the level energies at both fields.
///
/// With `map = None` the baths populate each spectrum independently. With a
/// map (`p_low` index to `p_high` index) the populations are carried along
/// the adiabats, so `dP_k = P_hot_k - P_cold_{map^-1(k)}`.
pub fn cycle_from_levels(
    e_high: &[f64],
    e_low: &[f64],
    t_hot: f64,
    t_cold: f64,
    map: Option<&LevelMap>,
) -> Result<CycleResult> {
    if e_high.len() != e_low.len() {
        return Err(Error::Dimension { expected: e_high.len(), got: e_low.len() });
    }
    let carnot = 1.0 - t_cold / t_hot;
    let hot_high = thermal::populations(e_high, t_hot)?;
    let cold_low = thermal::populations(e_low, t_cold)?;
    let (q_in, q_out) = match map {
        None => {
            let cold_high = thermal::populations(e_high, t_cold)?;
            let hot_low = thermal::populations(e_low, t_hot)?;
            let q_in = e_high.iter().zip(hot_high.iter().zip(&cold_high)).map(|(e, (h, c))| e * (h - c)).sum();
            let q_out = e_low.iter().zip(hot_low.iter().zip(&cold_low)).map(|(e, (h, c))| e * (h - c)).sum();
            (q_in, q_out)
        }
        Some(map) => {
            if map.len() != e_high.len() {
                return Err(Error::Dimension { expected: e_high.len(), got: map.len() });
            }
            let back = map.inverse();
            let mut q_in = 0.0;
            let mut q_out = 0.0;
            for k in 0..e_high.len() {
                let from = back.map(k);
                let dp = hot_high[k] - cold_low[from];
                q_in += e_high[k] * dp;
                q_out += e_low[from] * dp;
            }
            (q_in, q_out)
        }
    };
    Ok(CycleResult::from_heats(q_in, q_out, carnot))
}

pub fn run_cycle(spec: &CycleSpec) -> Result<CycleResult> {
    spec.validate()?;
    let high = Spectrum::from_params(&spec.params.with_e_field(spec.p_high))?;
    let low = Spectrum::from_params(&spec.params.with_e_field(spec.p_low))?;
    match spec.mode {
        CycleMode::ThermodynamicAdiabatic => {
            cycle_from_levels(high.energies(), low.energies(), spec.t_hot, spec.t_cold, None)
        }
        CycleMode::QuantumAdiabatic => {
            let steps = ((spec.p_high - spec.p_low).abs() * spec.steps_per_unit as f64).ceil().max(1.0) as usize;
            let map = spectra::continue_levels(&spec.params, spec.p_low, spec.p_high, steps)?;
            cycle_from_levels(high.energies(), low.energies(), spec.t_hot, spec.t_cold, Some(&map))
        }
    }
}

/// One point of an efficiency sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyRow {
    pub p_high: f64,
    /// `p_high / p_low`; infinite when `p_low == 0`.
    pub ratio: f64,
    pub quantum: core::result::Result<CycleResult, Error>,
    pub thermo: CycleResult,
    /// Two-tangle of the hot-bath state.
    pub tau2: f64,
    /// One-tangle of the hot-bath state.
    pub tau1: f64,
}

pub fn efficiency_row(spec: &CycleSpec, p_high: f64) -> Result<EfficiencyRow> {
    let at = spec.with_p_high(p_high);
    at.validate()?;
    let thermo = run_cycle(&at.with_mode(CycleMode::ThermodynamicAdiabatic))?;
    let quantum = run_cycle(&at.with_mode(CycleMode::QuantumAdiabatic));
    let hot = Spectrum::from_params(&spec.params.with_e_field(p_high))?;
    let rho = correlations::density_matrix(&thermal::gibbs(&hot, spec.t_hot)?)?;
    Ok(EfficiencyRow {
        p_high,
        ratio: p_high / spec.p_low,
        quantum,
        thermo,
        tau2: correlations::two_tangle(&rho)?,
        tau1: correlations::one_tangle(&rho)?,
    })
}

/// Efficiencies of both cycle variants and hot-bath tangles along a grid of
/// hot-side fields.
pub fn efficiency_sweep(spec: &CycleSpec, p_grid: &[f64]) -> Result<Vec<EfficiencyRow>> {
    if p_grid.is_empty() {
        return Err(invalid("field grid is empty"));
    }
    if let Some(p) = p_grid.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(invalid(format!("grid fields must be positive, got {p}")));
    }
    p_grid.iter().map(|&p| efficiency_row(spec, p)).collect()
}

/// Cycle result for each ring size in `n_list`.
pub fn size_scaling(spec: &CycleSpec, n_list: &[usize]) -> Result<Vec<(usize, CycleResult)>> {
    if let Some(n) = n_list.iter().find(|&&n| !(2..=MAX_SCALING_SITES).contains(&n)) {
        return Err(invalid(format!("size sweep supports 2..={MAX_SCALING_SITES} sites, got {n}")));
    }
    n_list.iter().map(|&n| Ok((n, run_cycle(&spec.with_n(n))?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(mode: CycleMode) -> CycleSpec {
        CycleSpec::new(ChainParams::new(4).with_b(1.0), 30.0, 10.0, 7.0, 3.5, mode)
    }

    #[test]
    fn equal_fields_give_zero_efficiency() {
        for mode in [CycleMode::QuantumAdiabatic, CycleMode::ThermodynamicAdiabatic] {
            let r = run_cycle(&base(mode).with_p_high(3.5)).unwrap();
            assert!((r.q_in - r.q_out).abs() < 1e-12);
            assert!(r.efficiency.abs() < 1e-12);
        }
    }

    #[test]
    fn carnot_reference() {
        let r = run_cycle(&base(CycleMode::ThermodynamicAdiabatic)).unwrap();
        assert!((r.carnot - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.work, r.q_in - r.q_out);
    }

    #[test]
    fn shift_invariance() {
        let s = base(CycleMode::ThermodynamicAdiabatic);
        let hi = Spectrum::from_params(&s.params.with_e_field(7.0)).unwrap();
        let lo = Spectrum::from_params(&s.params.with_e_field(3.5)).unwrap();
        let a = cycle_from_levels(hi.energies(), lo.energies(), 30.0, 10.0, None).unwrap();
        let shift = |e: &[f64]| e.iter().map(|x| x + 123.0).collect::<Vec<_>>();
        let b = cycle_from_levels(&shift(hi.energies()), &shift(lo.energies()), 30.0, 10.0, None).unwrap();
        assert!((a.efficiency - b.efficiency).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_spec() {
        let mut s = base(CycleMode::ThermodynamicAdiabatic);
        s.t_cold = 40.0;
        assert!(run_cycle(&s).is_err());
        assert!(run_cycle(&base(CycleMode::ThermodynamicAdiabatic).with_p_high(-1.0)).is_err());
        assert!(efficiency_sweep(&base(CycleMode::QuantumAdiabatic), &[]).is_err());
        assert!(size_scaling(&base(CycleMode::QuantumAdiabatic), &[11]).is_err());
    }

    #[test]
    fn sweep_row_at_cold_field_is_idle() {
        let rows = efficiency_sweep(&base(CycleMode::QuantumAdiabatic), &[3.5]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].thermo.efficiency.abs() < 1e-12);
        assert!(rows[0].quantum.as_ref().unwrap().efficiency.abs() < 1e-12);
        assert_eq!(rows[0].ratio, 1.0);
    }

    #[test]
    fn two_site_ring_runs() {
        let r = size_scaling(&base(CycleMode::ThermodynamicAdiabatic), &[2, 3]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].1.q_in.is_finite());
    }

    #[test]
    fn regime_flags() {
        assert_eq!(CycleResult::from_heats(-1.0, 0.0, 0.5).regime, Regime::NoHeatIntake);
        assert_eq!(CycleResult::from_heats(1.0, 2.0, 0.5).regime, Regime::NegativeWork);
        assert!(CycleResult::from_heats(0.0, 0.0, 0.5).efficiency.is_nan());
    }
}
