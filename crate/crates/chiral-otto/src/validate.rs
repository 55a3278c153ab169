//! Differential test suite: every numeric path against an independent
//! closed form or identity, with the worst deviation reported per check.

use chiral_otto_core::analytic4::{self, coeffs4};
use chiral_otto_core::correlations::{self, density_matrix, partial_trace};
use chiral_otto_core::model::{self, ChainParams};
use chiral_otto_core::otto;
use chiral_otto_core::response::{self, FieldTag, SusceptibilityProbe};
use chiral_otto_core::semiclassical::{self, ScConfig};
use chiral_otto_core::spectra::{self, Spectrum};
use chiral_otto_core::{thermal, Error as CoreError};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Added to the lowest numeric level before it is compared.
    pub perturb_energy: f64,
    /// Also confirm that a perturbed run is caught.
    pub negative_control: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { perturb_energy: 0.0, negative_control: true }
    }
}

/// Negative-control perturbation of the lowest level.
pub const CONTROL_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub max_dev: f64,
    pub tol: f64,
    pub error: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_dev <= self.tol
    }
}

type CheckFn = fn(&SuiteOptions) -> Result<f64, CoreError>;

/// Name, tolerance and deviation function of every check.
const CHECKS: &[(&str, f64, CheckFn)] = &[
    ("hermiticity", 1e-14, hermiticity),
    ("sz_conservation", 1e-12, sz_conservation),
    ("translation_invariance", 1e-12, translation_invariance),
    ("field_linearity", 1e-14, field_linearity),
    ("sector_vs_dense_spectrum", 1e-10, sector_vs_dense),
    ("eigen_reconstruction", 1e-9, reconstruction),
    ("closed_form_spectrum", 1e-10, closed_form_spectrum),
    ("partition_function", 1e-8, partition_function),
    ("reduced_density_coefficients", 1e-8, reduced_coefficients),
    ("pair_concurrences", 1e-8, pair_concurrences),
    ("one_tangle", 1e-8, one_tangle),
    ("two_tangle", 1e-8, two_tangle),
    ("chirality", 1e-8, chirality),
    ("chi_magnetic", 1e-4, chi_magnetic),
    ("chi_electric", 1e-4, chi_electric),
    ("nearest_pair_symmetry", 1e-8, nearest_pair_symmetry),
    ("gibbs_trace_and_positivity", 1e-12, gibbs_trace_psd),
    ("concurrence_range", 0.0, concurrence_range),
    ("fidelity_identity", 1e-9, fidelity_identity),
    ("fidelity_symmetry", 1e-9, fidelity_symmetry),
    ("fidelity_commuting_states", 1e-9, fidelity_commuting),
    ("fidelity_quadratic_order", 0.1, fidelity_quadratic_order),
    ("entropy_monotonicity", 1e-12, entropy_monotonicity),
    ("free_energy_identity", 1e-10, free_energy_identity),
    ("entropy_free_energy_slope", 1e-5, entropy_slope),
    ("semiclassical_zero_field", 1e-12, semiclassical_zero_field),
    ("semiclassical_entropy_slope", 1e-5, semiclassical_entropy_slope),
    ("coupled_level_support", 1e-10, coupled_level_support),
    ("semiclassical_vs_cycle", 0.2, semiclassical_vs_cycle),
    ("cycle_bookkeeping", 0.0, cycle_bookkeeping),
    ("cycle_shift_invariance", 1e-9, cycle_shift_invariance),
    ("continuation_round_trip", 0.0, continuation_round_trip),
];

pub fn check_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = CHECKS.iter().map(|c| c.0).collect();
    names.push("negative_control");
    names
}

/// Runs every check, in parallel on the current rayon pool.
pub fn run_suite(opts: &SuiteOptions) -> Vec<CheckReport> {
    let names: Vec<&str> = CHECKS.iter().map(|c| c.0).collect();
    let mut reports = run_checks(&names, opts);
    for r in &reports {
        log::debug!("{}: max deviation {:e} (tolerance {:e})", r.name, r.max_dev, r.tol);
    }
    if opts.negative_control && opts.perturb_energy == 0.0 {
        reports.push(negative_control());
    }
    reports
}

/// Runs only the named checks, in the given order.
pub fn run_checks(names: &[&str], opts: &SuiteOptions) -> Vec<CheckReport> {
    names
        .par_iter()
        .map(|name| match CHECKS.iter().find(|c| c.0 == *name) {
            Some(&(name, tol, f)) => match f(opts) {
                Ok(d) => CheckReport { name, max_dev: if d.is_nan() { f64::INFINITY } else { d }, tol, error: None },
                Err(e) => CheckReport { name, max_dev: f64::INFINITY, tol, error: Some(e.to_string()) },
            },
            None => CheckReport {
                name: "unknown",
                max_dev: f64::INFINITY,
                tol: 0.0,
                error: Some(format!("no check named {name}")),
            },
        })
        .collect()
}

/// Confirms that a perturbation of [`CONTROL_PERTURBATION`] in one level
/// makes the suite fail. The deviation is the number of energy checks that
/// missed it.
pub fn negative_control() -> CheckReport {
    let opts = SuiteOptions { perturb_energy: CONTROL_PERTURBATION, negative_control: false };
    let energy_checks: [CheckFn; 3] = [sector_vs_dense, closed_form_spectrum, partition_function];
    let tols = [1e-10, 1e-10, 1e-8];
    let missed = energy_checks.iter().zip(tols).filter(|(f, tol)| matches!(f(&opts), Ok(d) if d <= *tol)).count();
    CheckReport { name: "negative_control", max_dev: missed as f64, tol: 0.0, error: None }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x) })
}

/// Relative deviation of `num` from `closed`, with absolute comparison for
/// values below `floor`.
fn rel(num: f64, closed: f64, floor: f64) -> f64 {
    (num - closed).abs() / closed.abs().max(floor)
}

/// Fixed pseudo-random parameter draws on rings of 2 to 8 sites.
fn sample_params() -> Vec<ChainParams> {
    (0..21)
        .map(|k| {
            let x = k as f64;
            ChainParams::new(2 + k % 7)
                .with_exchange(2.0 * (1.3 * x).sin(), 2.0 * (0.7 * x + 1.0).cos())
                .with_b(2.0 * (0.9 * x + 0.3).sin())
                .with_e_field(5.0 * (1.7 * x).cos())
        })
        .collect()
}

/// The four-site grid shared by the closed-form comparisons.
fn ring4_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut grid = Vec::new();
    for j in [0.5, 1.0, 2.0] {
        for b in [0.0, 1.0, 2.0] {
            for d in [0.0, 1.0, 5.0] {
                for t in [1.0, 10.0, 30.0, 100.0] {
                    grid.push((j, b, d, t));
                }
            }
        }
    }
    grid
}

fn ring4(j: f64, b: f64, d: f64) -> ChainParams {
    ChainParams::new(4).with_j(j).with_b(b).with_e_field(d)
}

/// Numeric levels with the optional perturbation applied.
fn numeric_levels(p: &ChainParams, opts: &SuiteOptions) -> Result<Vec<f64>, CoreError> {
    let mut e = Spectrum::from_params(p)?.energies().to_vec();
    e[0] += opts.perturb_energy;
    Ok(e)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn hermiticity(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        worst = worst.max(model::build_hamiltonian(&p)?.hermiticity_defect());
        worst = worst.max(model::build_chirality_operator(p.n)?.hermiticity_defect());
    }
    Ok(worst)
}

fn sz_conservation(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let sz = model::build_total_sz(p.n)?;
        worst = worst.max(model::build_hamiltonian(&p)?.commutator(&sz).max_abs());
        worst = worst.max(model::build_chirality_operator(p.n)?.commutator(&sz).max_abs());
    }
    Ok(worst)
}

fn translation_invariance(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let shift = model::build_translation(p.n)?;
        worst = worst.max(model::build_hamiltonian(&p)?.commutator(&shift).max_abs());
    }
    Ok(worst)
}

fn field_linearity(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let h = model::build_hamiltonian(&p)?;
        let h0 = model::build_hamiltonian(&p.with_e_field(0.0))?;
        let k = model::build_chirality_operator(p.n)?;
        let diff = h.matrix() - h0.matrix() + k.matrix().scale(p.e_field);
        worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

fn sector_vs_dense(opts: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let blocked = sorted(numeric_levels(&p, opts)?);
        let dense = spectra::dense_energies(&model::build_hamiltonian(&p)?)?;
        worst = worst.max(max_of(blocked.iter().zip(&dense).map(|(a, b)| (a - b).abs())));
    }
    Ok(worst)
}

fn reconstruction(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let spec = Spectrum::from_params(&p)?;
        worst = worst.max(spectra::max_residual(&model::build_hamiltonian(&p)?, &spec));
    }
    Ok(worst)
}

fn closed_form_spectrum(opts: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for j in [0.5, 1.0, 1.5, 2.0] {
        for b in [0.0, 0.7, 1.0, 2.0] {
            for d in [0.0, 1.0, 3.3, 10.0] {
                let num = sorted(numeric_levels(&ring4(j, b, d), opts)?);
                let closed = sorted(analytic4::spectrum4(j, b, d).to_vec());
                worst = worst.max(max_of(num.iter().zip(&closed).map(|(a, b)| (a - b).abs())));
            }
        }
    }
    Ok(worst)
}

fn partition_function(opts: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (j, b, d, t) in ring4_grid() {
        let levels = numeric_levels(&ring4(j, b, d), opts)?;
        let num = -thermal::free_energy_of(&levels, t)? / t;
        worst = worst.max(rel(num, coeffs4(j, b, d, t)?.ln_z(), 1e-300));
    }
    Ok(worst)
}

/// Runs `f` on the numeric density matrix and closed-form bundle of every
/// grid point and returns the worst deviation.
fn over_grid(
    f: impl Fn(&correlations::DensityMatrix, &analytic4::Analytic4Derived) -> Result<f64, CoreError>,
) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (j, b, d, t) in ring4_grid() {
        let spec = Spectrum::from_params(&ring4(j, b, d))?;
        let rho = density_matrix(&thermal::gibbs(&spec, t)?)?;
        worst = worst.max(f(&rho, &coeffs4(j, b, d, t)?)?);
    }
    Ok(worst)
}

fn reduced_coefficients(_: &SuiteOptions) -> Result<f64, CoreError> {
    over_grid(|rho, der| {
        let r12 = partial_trace(rho, &[0, 1])?;
        let r13 = partial_trace(rho, &[0, 2])?;
        let (m, n) = (r12.matrix(), r13.matrix());
        let z = der.z;
        let pairs = [
            (m[(0, 0)].re, der.a1 / z),
            (m[(1, 1)].re, der.b1 / z),
            (m[(2, 2)].re, der.b1 / z),
            (m[(3, 3)].re, der.d1 / z),
            (m[(1, 2)].re, der.c1.re / z),
            (m[(1, 2)].im, der.c1.im / z),
            (n[(0, 0)].re, der.a2 / z),
            (n[(3, 3)].re, der.b2 / z),
            (n[(1, 1)].re, der.c2 / z),
            (n[(2, 2)].re, der.c2 / z),
            (n[(1, 2)].re, der.d2 / z),
        ];
        // Entries are probabilities or coherences bounded by one.
        Ok(max_of(pairs.iter().map(|&(a, b)| rel(a, b, 1.0))))
    })
}

fn pair_concurrences(_: &SuiteOptions) -> Result<f64, CoreError> {
    over_grid(|rho, der| {
        let (c12, c13) = analytic4::concurrences4(der);
        Ok(rel(correlations::pair_concurrence(rho, 0, 1)?, c12, 1.0).max(rel(
            correlations::pair_concurrence(rho, 0, 2)?,
            c13,
            1.0,
        )))
    })
}

fn one_tangle(_: &SuiteOptions) -> Result<f64, CoreError> {
    over_grid(|rho, der| Ok(rel(correlations::one_tangle(rho)?, analytic4::one_tangle4(der), 1.0)))
}

fn two_tangle(_: &SuiteOptions) -> Result<f64, CoreError> {
    over_grid(|rho, der| Ok(rel(correlations::two_tangle(rho)?, analytic4::two_tangle4(der), 1.0)))
}

fn chirality(_: &SuiteOptions) -> Result<f64, CoreError> {
    let k = model::build_chirality_operator(4)?;
    over_grid(|rho, der| Ok(rel(correlations::chirality_expectation(rho, &k)?, analytic4::chirality4(der), 1.0)))
}

fn chi_check(field: FieldTag) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    let grid = ring4_grid();
    for chunk in grid.chunks(4) {
        let (j, b, d, _) = chunk[0];
        let probe = SusceptibilityProbe::new(&ring4(j, b, d), field)?;
        for &(_, _, _, t) in chunk {
            let closed = match field {
                FieldTag::Magnetic => analytic4::chi_b4(j, b, d, t)?,
                FieldTag::Electric => analytic4::chi_e4(j, b, d, t)?,
            };
            worst = worst.max(rel(probe.chi(t)?, closed, 1e-300));
        }
    }
    Ok(worst)
}

fn chi_magnetic(_: &SuiteOptions) -> Result<f64, CoreError> {
    chi_check(FieldTag::Magnetic)
}

fn chi_electric(_: &SuiteOptions) -> Result<f64, CoreError> {
    chi_check(FieldTag::Electric)
}

fn nearest_pair_symmetry(_: &SuiteOptions) -> Result<f64, CoreError> {
    over_grid(|rho, _| {
        Ok((correlations::pair_concurrence(rho, 0, 1)? - correlations::pair_concurrence(rho, 0, 3)?).abs())
    })
}

/// Thermal states of the sample draws at a spread of temperatures.
fn sample_states() -> Result<Vec<(ChainParams, f64, correlations::DensityMatrix)>, CoreError> {
    let mut out = Vec::new();
    for (k, p) in sample_params().into_iter().enumerate() {
        let t = [0.1, 1.0, 7.0, 40.0][k % 4];
        let spec = Spectrum::from_params(&p)?;
        out.push((p, t, density_matrix(&thermal::gibbs(&spec, t)?)?));
    }
    Ok(out)
}

fn gibbs_trace_psd(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (_, _, rho) in sample_states()? {
        worst = worst.max((rho.trace() - 1.0).abs()).max(-rho.min_eigenvalue()?);
    }
    Ok(worst)
}

fn concurrence_range(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (_, _, rho) in sample_states()? {
        for c in correlations::concurrences_by_distance(&rho)? {
            worst = worst.max(-c).max(c - 1.0);
        }
    }
    Ok(worst)
}

fn fidelity_identity(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (_, _, rho) in sample_states()? {
        worst = worst.max((response::uhlmann_fidelity(&rho, &rho)? - 1.0).abs());
    }
    Ok(worst)
}

fn fidelity_symmetry(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (p, t, rho) in sample_states()? {
        let other = Spectrum::from_params(&p.with_e_field(p.e_field + 0.5))?;
        let sigma = density_matrix(&thermal::gibbs(&other, 1.5 * t)?)?;
        let f = response::uhlmann_fidelity(&rho, &sigma)?;
        let g = response::uhlmann_fidelity(&sigma, &rho)?;
        worst = worst.max((f - g).abs()).max(f - 1.0 - 1e-9).max(-f);
    }
    Ok(worst)
}

fn fidelity_commuting(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (p, t, rho) in sample_states()? {
        let spec = Spectrum::from_params(&p)?;
        let (g0, g1) = (thermal::gibbs(&spec, t)?, thermal::gibbs(&spec, 2.0 * t)?);
        let classical: f64 = g0.populations().iter().zip(g1.populations()).map(|(a, b)| (a * b).sqrt()).sum();
        let sigma = density_matrix(&g1)?;
        worst = worst.max((response::uhlmann_fidelity(&rho, &sigma)? - classical).abs());
    }
    Ok(worst)
}

/// Relative change of `|ln F - ln F_approx| / dz^2` between `dz = 1e-2`
/// and `dz = 1e-3`; it settles to a constant when the approximation is
/// correct to second order.
fn fidelity_quadratic_order(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for &(d, t) in &[(1.0, 5.0), (5.0, 20.0), (10.0, 22.0)] {
        let p = ChainParams::new(4).with_b(1.0).with_e_field(d);
        let chi = response::susceptibility(&p, FieldTag::Electric, t)?;
        let rho = density_matrix(&thermal::gibbs(&Spectrum::from_params(&p)?, t)?)?;
        let mut scaled = Vec::new();
        for dz in [1e-2, 1e-3] {
            let other = Spectrum::from_params(&p.with_e_field(d + dz))?;
            let exact = response::uhlmann_fidelity(&rho, &density_matrix(&thermal::gibbs(&other, t)?)?)?;
            let approx = response::fidelity_quadratic_approx(1.0 / t, dz, chi)?;
            scaled.push((exact.ln() - approx.ln()).abs() / (dz * dz));
        }
        worst = worst.max((scaled[1] - scaled[0]).abs() / scaled[0].max(1e-6));
    }
    Ok(worst)
}

fn entropy_monotonicity(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let spec = Spectrum::from_params(&p)?;
        let mut last = f64::NEG_INFINITY;
        for k in 0..=100 {
            let t = 0.1 * 1000f64.powf(k as f64 / 100.0);
            let s = thermal::entropy(&spec, t)?;
            worst = worst.max(last - s);
            last = s;
        }
    }
    Ok(worst)
}

fn free_energy_identity(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (p, t, _) in sample_states()? {
        let spec = Spectrum::from_params(&p)?;
        let u = thermal::internal_energy(&thermal::gibbs(&spec, t)?);
        let f = thermal::free_energy(&spec, t)?;
        let s = thermal::entropy(&spec, t)?;
        worst = worst.max(rel(f, u - t * s, 1.0));
    }
    Ok(worst)
}

fn entropy_slope(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in sample_params() {
        let spec = Spectrum::from_params(&p)?;
        for t in [2.0, 20.0] {
            let h = 1e-3 * t;
            let fd = -(thermal::free_energy(&spec, t + h)? - thermal::free_energy(&spec, t - h)?) / (2.0 * h);
            worst = worst.max(rel(fd, thermal::entropy(&spec, t)?, 1e-3));
        }
    }
    Ok(worst)
}

fn semiclassical_zero_field(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (j, b) in [(0.5, 0.0), (1.0, 1.0), (2.0, 0.5)] {
        let cfg = ScConfig::new(j, b)?;
        let spec = Spectrum::from_params(&ring4(j, b, 0.0))?;
        for t in [0.5, 5.0, 50.0] {
            let exact = thermal::free_energy(&spec, t)?;
            worst = worst.max(rel(semiclassical::free_energy_sc(t, 0.0, &cfg)?, exact, 1.0));
        }
    }
    Ok(worst)
}

fn semiclassical_entropy_slope(_: &SuiteOptions) -> Result<f64, CoreError> {
    let cfg = ScConfig::default();
    let mut worst = 0.0f64;
    for t in [5.0, 20.0, 100.0] {
        for p in [0.1, 1.0, 3.0] {
            let h = 1e-4 * t;
            let fd = -(semiclassical::free_energy_sc(t + h, p, &cfg)? - semiclassical::free_energy_sc(t - h, p, &cfg)?)
                / (2.0 * h);
            worst = worst.max(rel(fd, semiclassical::entropy_sc(t, p, &cfg)?, 1e-3));
        }
    }
    Ok(worst)
}

/// Largest field matrix element touching a level outside the coupled set.
fn coupled_level_support(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for (j, b) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)] {
        let cfg = ScConfig::new(j, b)?;
        let special: Vec<f64> = semiclassical::COUPLED_LEVELS.iter().map(|&i| cfg.energies[i]).collect();
        let spec = Spectrum::from_params(&ring4(j, b, 0.0))?;
        let k = model::build_chirality_operator(4)?;
        let v = spec.states();
        let elements = v.adjoint() * (k.matrix() * &v);
        let coupled = |e: f64| special.iter().any(|s| (s - e).abs() < 1e-9);
        for a in 0..16 {
            for c in 0..16 {
                let (ea, ec) = (spec.energies()[a], spec.energies()[c]);
                if a != c && (ea - ec).abs() > 1e-9 && !(coupled(ea) && coupled(ec)) {
                    worst = worst.max(elements[(a, c)].norm());
                }
            }
        }
    }
    Ok(worst)
}

fn semiclassical_vs_cycle(_: &SuiteOptions) -> Result<f64, CoreError> {
    let (t_l, t_h, p, p1) = (100.0, 120.0, 1.0, 0.5);
    let eta_sc = semiclassical::efficiency_sc(t_l, t_h, p, p1, &ScConfig::default())?;
    let spec = otto::CycleSpec::new(ring4(1.0, 1.0, 0.0), t_h, t_l, p, p1, otto::CycleMode::ThermodynamicAdiabatic);
    let eta = otto::run_cycle(&spec)?.efficiency;
    Ok(rel(eta_sc, eta, 1e-12))
}

fn cycle_bookkeeping(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for mode in [otto::CycleMode::ThermodynamicAdiabatic, otto::CycleMode::QuantumAdiabatic] {
        for p in [3.5, 7.0, 20.0] {
            let spec = otto::CycleSpec::new(ring4(1.0, 1.0, 0.0), 30.0, 10.0, p, 3.5, mode);
            let r = otto::run_cycle(&spec)?;
            worst = worst.max((r.work - (r.q_in - r.q_out)).abs());
        }
    }
    Ok(worst)
}

fn cycle_shift_invariance(_: &SuiteOptions) -> Result<f64, CoreError> {
    let mut worst = 0.0f64;
    for p in [5.0, 10.0, 30.0] {
        let hi = Spectrum::from_params(&ring4(1.0, 1.0, p))?;
        let lo = Spectrum::from_params(&ring4(1.0, 1.0, 3.5))?;
        let base = otto::cycle_from_levels(hi.energies(), lo.energies(), 30.0, 10.0, None)?;
        for c in [-7.5, 3.0, 40.0] {
            let eh: Vec<f64> = hi.energies().iter().map(|e| e + c).collect();
            let el: Vec<f64> = lo.energies().iter().map(|e| e + c).collect();
            let moved = otto::cycle_from_levels(&eh, &el, 30.0, 10.0, None)?;
            worst = worst.max((moved.efficiency - base.efficiency).abs());
        }
    }
    Ok(worst)
}

fn continuation_round_trip(_: &SuiteOptions) -> Result<f64, CoreError> {
    let p = ring4(1.0, 1.0, 0.0);
    let there = spectra::continue_levels_default(&p, 3.5, 10.0)?;
    let back = spectra::continue_levels_default(&p, 10.0, 3.5)?;
    let round = there.then(&back);
    // Relabelling inside an exactly degenerate multiplet of one sector is
    // not observable, so only moves between distinct levels count.
    let spec = Spectrum::from_params(&p.with_e_field(3.5))?;
    let (e, sz) = (spec.energies(), spec.sz_labels());
    let moved =
        round.as_slice().iter().enumerate().filter(|&(i, &k)| sz[i] != sz[k] || (e[i] - e[k]).abs() > 1e-9).count();
    let ground_moved = usize::from(there.map(0) != 0);
    Ok((moved + ground_moved) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_has_a_unique_name() {
        let mut names = check_names();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), total);
    }

    #[test]
    fn failed_checks_report_infinite_deviation() {
        let r = CheckReport { name: "x", max_dev: f64::INFINITY, tol: 1.0, error: Some("boom".into()) };
        assert!(!r.passed());
        assert!(CheckReport { name: "y", max_dev: 0.5, tol: 1.0, error: None }.passed());
    }
}
