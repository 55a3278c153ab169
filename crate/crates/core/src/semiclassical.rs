//! Second-order thermodynamic perturbation theory in the electric field for
//! the four-site ring.
//!
//! With `H = H0 + p V`, the free energy to order `p^2` is
//!
//! ```text
//! F = -T ln Z0 - 16 p^2 A / (T Z0),   A = sum over the four coupled levels
//! ```
//!
//! where the coupled levels are those with nonzero off-diagonal matrix
//! elements of the chirality operator in the field-free eigenbasis.

use alloc::format;

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::analytic4;
use crate::error::{invalid, Error, Result};
use crate::thermal::check_temperature;

/// 0-based indices of the field-coupled levels `4j2 - 2b`, `4j2 + 2b`,
/// `4j1 - 4j2` and `12 j2` in the closed-form numbering.
pub const COUPLED_LEVELS: [usize; 4] = [1, 11, 5, 6];

/// Temperature step of the entropy derivative.
pub const ENTROPY_STEP: f64 = 1e-3;

/// Absolute tolerance of the heat integrals.
pub const QUAD_TOL: f64 = 1e-8;

/// Relative size of the correction beyond which the expansion is flagged.
pub const VALIDITY_RATIO: f64 = 0.2;

const MAX_DEPTH: u32 = 48;

/// Field-free reference system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScConfig {
    pub j: f64,
    pub b: f64,
    /// Field-free energies in the closed-form numbering.
    pub energies: [f64; 16],
}

impl ScConfig {
    pub fn new(j: f64, b: f64) -> Result<Self> {
        if !j.is_finite() || !b.is_finite() {
            return Err(invalid("couplings must be finite"));
        }
        Ok(Self { j, b, energies: analytic4::spectrum4(j, b, 0.0) })
    }

    /// Shift-free thermal averages used by both the free energy and the
    /// entropy.
    fn moments(&self, t: f64) -> Moments {
        let e_min = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let w = self.energies.map(|e| (-(e - e_min) / t).exp());
        let z: f64 = w.iter().sum();
        let mean = self.energies.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z;
        let a = COUPLED_LEVELS.iter().map(|&k| w[k]).sum::<f64>() / z;
        let a_e = COUPLED_LEVELS.iter().map(|&k| self.energies[k] * w[k]).sum::<f64>() / z;
        Moments { ln_z: -e_min / t + z.ln(), mean, a, a_e }
    }
}

struct Moments {
    ln_z: f64,
    /// `Z_E / Z0`.
    mean: f64,
    /// `A / Z0`.
    a: f64,
    /// `A_E / Z0`.
    a_e: f64,
}

impl Default for ScConfig {
    fn default() -> Self {
        Self { j: 1.0, b: 1.0, energies: analytic4::spectrum4(1.0, 1.0, 0.0) }
    }
}

/// Leading term and `p^2` correction of the free energy.
pub fn free_energy_sc_parts(t: f64, p: f64, cfg: &ScConfig) -> Result<(f64, f64)> {
    check_temperature(t)?;
    let m = cfg.moments(t);
    Ok((-t * m.ln_z, -16.0 * p * p * m.a / t))
}

pub fn free_energy_sc(t: f64, p: f64, cfg: &ScConfig) -> Result<f64> {
    let (f0, f1) = free_energy_sc_parts(t, p, cfg)?;
    Ok(f0 + f1)
}

/// `-dF/dT` of [`free_energy_sc`], in closed form.
pub fn entropy_sc(t: f64, p: f64, cfg: &ScConfig) -> Result<f64> {
    check_temperature(t)?;
    let m = cfg.moments(t);
    let t2 = t * t;
    let t3 = t2 * t;
    Ok(m.ln_z + m.mean / t - 16.0 * p * p * (m.a / t2 - m.a_e / t3 + m.a * m.mean / t3))
}

/// Whether a point lies inside the range where the expansion is trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// `|correction| / |leading term|` of the free energy.
    pub correction_ratio: f64,
    pub entropy_negative: bool,
}

impl Validity {
    pub fn perturbative(&self) -> bool {
        self.correction_ratio <= VALIDITY_RATIO && !self.entropy_negative
    }
}

pub fn validity(t: f64, p: f64, cfg: &ScConfig) -> Result<Validity> {
    let (f0, f1) = free_energy_sc_parts(t, p, cfg)?;
    let ratio = if f0 == 0.0 {
        if f1 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (f1 / f0).abs()
    };
    Ok(Validity { correction_ratio: ratio, entropy_negative: entropy_sc(t, p, cfg)? < 0.0 })
}

/// `dS/dT` by a central difference of step [`ENTROPY_STEP`].
pub fn entropy_slope_sc(t: f64, p: f64, cfg: &ScConfig) -> Result<f64> {
    let h = ENTROPY_STEP;
    if t - h <= 0.0 {
        return Err(invalid(format!("temperature {t} too close to zero for the entropy slope")));
    }
    Ok((entropy_sc(t + h, p, cfg)? - entropy_sc(t - h, p, cfg)?) / (2.0 * h))
}

/// `int_{t_l}^{t_h} T dS/dT dT` at field `p`: the heat exchanged along an
/// isochore.
pub fn isochore_heat_sc(t_l: f64, t_h: f64, p: f64, cfg: &ScConfig) -> Result<f64> {
    adaptive_simpson(|t| Ok(t * entropy_slope_sc(t, p, cfg)?), t_l, t_h, QUAD_TOL)
}

/// `1 - Q(p1) / Q(p)` with both heats taken over `[t_l, t_h]`.
pub fn efficiency_sc(t_l: f64, t_h: f64, p: f64, p1: f64, cfg: &ScConfig) -> Result<f64> {
    if !(t_l > 0.0 && t_h > t_l && t_h.is_finite()) {
        return Err(invalid(format!("need t_h > t_l > 0, got {t_l} and {t_h}")));
    }
    let q_in = isochore_heat_sc(t_l, t_h, p, cfg)?;
    let q_out = isochore_heat_sc(t_l, t_h, p1, cfg)?;
    if q_in == 0.0 || !q_in.is_finite() {
        return Err(Error::Degenerate(format!("heat integral at field {p} is {q_in}")));
    }
    Ok(1.0 - q_out / q_in)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal;

    #[test]
    fn field_free_matches_exact_free_energy() {
        let cfg = ScConfig::default();
        for t in [0.5, 3.0, 40.0] {
            let exact = thermal::free_energy_of(&cfg.energies, t).unwrap();
            assert!((free_energy_sc(t, 0.0, &cfg).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn correction_is_negative() {
        let cfg = ScConfig::default();
        let (_, f1) = free_energy_sc_parts(5.0, 0.3, &cfg).unwrap();
        assert!(f1 < 0.0);
    }

    #[test]
    fn entropy_is_free_energy_slope() {
        let cfg = ScConfig::default();
        for t in [5.0, 20.0, 100.0] {
            let h = 1e-4 * t;
            let fd =
                -(free_energy_sc(t + h, 1.0, &cfg).unwrap() - free_energy_sc(t - h, 1.0, &cfg).unwrap()) / (2.0 * h);
            let s = entropy_sc(t, 1.0, &cfg).unwrap();
            assert!(((fd - s) / s).abs() < 1e-5, "t={t}: {fd} vs {s}");
        }
    }

    #[test]
    fn high_temperature_entropy() {
        let cfg = ScConfig::default();
        assert!((entropy_sc(1e9, 0.0, &cfg).unwrap() - 16f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn equal_fields_have_zero_efficiency() {
        let cfg = ScConfig::default();
        assert_eq!(efficiency_sc(100.0, 120.0, 0.5, 0.5, &cfg).unwrap(), 0.0);
        assert!(efficiency_sc(100.0, 90.0, 1.0, 0.5, &cfg).is_err());
    }

    #[test]
    fn simpson_integrates_polynomials() {
        let v = adaptive_simpson(|x| Ok(x * x * x - x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| Ok(x.exp()), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn validity_flags() {
        let cfg = ScConfig::default();
        assert!(validity(100.0, 0.1, &cfg).unwrap().perturbative());
        assert!(!validity(1.0, 5.0, &cfg).unwrap().perturbative());
    }
}
