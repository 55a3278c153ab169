//! Canonical ensemble over a spectrum, with `k_B = 1`.
//!
//! Every exponential is shifted by the ground energy, so `beta` may be huge
//! without overflow.

use alloc::format;
use alloc::vec::Vec;

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::spectra::Spectrum;

pub(crate) fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("temperature must be positive and finite, got {t}")));
    }
    Ok(())
}

/// Shifted Boltzmann factors of a list of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannWeights {
    /// `exp(-(E_k - E_min) / t)`, in input order.
    pub factors: Vec<f64>,
    /// Sum of `factors`.
    pub z_shifted: f64,
    pub e_min: f64,
}

impl BoltzmannWeights {
    pub fn new(energies: &[f64], t: f64) -> Result<Self> {
        check_temperature(t)?;
        if energies.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let factors: Vec<f64> = energies.iter().map(|&e| (-(e - e_min) / t).exp()).collect();
        let z_shifted = factors.iter().sum();
        Ok(Self { factors, z_shifted, e_min })
    }

    pub fn populations(&self) -> Vec<f64> {
        self.factors.iter().map(|w| w / self.z_shifted).collect()
    }
}

/// Populations `P_k` of levels at temperature `t`.
pub fn populations(energies: &[f64], t: f64) -> Result<Vec<f64>> {
    Ok(BoltzmannWeights::new(energies, t)?.populations())
}

/// Free energy split as `(E_min, -t ln(1 + sum_{k != min} w_k))`, the second
/// part being small and accurate even when `t` is tiny.
pub fn free_energy_parts(energies: &[f64], t: f64) -> Result<(f64, f64)> {
    let w = BoltzmannWeights::new(energies, t)?;
    let ground = energies.iter().position(|&e| e == w.e_min).unwrap_or(0);
    let excited: f64 = w.factors.iter().enumerate().filter(|&(k, _)| k != ground).map(|(_, &f)| f).sum();
    Ok((w.e_min, -t * excited.ln_1p()))
}

/// `-t ln Z` of a list of levels.
pub fn free_energy_of(energies: &[f64], t: f64) -> Result<f64> {
    let (g, th) = free_energy_parts(energies, t)?;
    Ok(g + th)
}

/// `sum_k E_k P_k` of a list of levels.
pub fn internal_energy_of(energies: &[f64], t: f64) -> Result<f64> {
    let p = populations(energies, t)?;
    Ok(energies.iter().zip(&p).map(|(e, p)| e * p).sum())
}

/// `(U - F) / t` of a list of levels.
pub fn entropy_of(energies: &[f64], t: f64) -> Result<f64> {
    Ok((internal_energy_of(energies, t)? - free_energy_of(energies, t)?) / t)
}

/// Equilibrium state of a spectrum at one temperature.
#[derive(Debug, Clone)]
pub struct GibbsState<'a> {
    spectrum: &'a Spectrum,
    temperature: f64,
    weights: BoltzmannWeights,
    populations: Vec<f64>,
}

impl<'a> GibbsState<'a> {
    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// `ln Z`, finite for any temperature.
    pub fn ln_z(&self) -> f64 {
        -self.weights.e_min / self.temperature + self.weights.z_shifted.ln()
    }

    /// Partition function. Overflows to infinity when `-E_min / t` is large;
    /// prefer [`GibbsState::ln_z`] or [`GibbsState::z_shifted`].
    pub fn z(&self) -> f64 {
        self.ln_z().exp()
    }

    /// `Z exp(E_min / t)`.
    pub fn z_shifted(&self) -> f64 {
        self.weights.z_shifted
    }
}

pub fn gibbs(spec: &Spectrum, t: f64) -> Result<GibbsState<'_>> {
    let weights = BoltzmannWeights::new(spec.energies(), t)?;
    let populations = weights.populations();
    Ok(GibbsState { spectrum: spec, temperature: t, weights, populations })
}

pub fn internal_energy(g: &GibbsState<'_>) -> f64 {
    g.spectrum.energies().iter().zip(&g.populations).map(|(e, p)| e * p).sum()
}

pub fn free_energy(spec: &Spectrum, t: f64) -> Result<f64> {
    free_energy_of(spec.energies(), t)
}

pub fn entropy(spec: &Spectrum, t: f64) -> Result<f64> {
    entropy_of(spec.energies(), t)
}
