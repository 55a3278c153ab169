//! Uhlmann fidelity and field susceptibilities.

use alloc::vec::Vec;

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::correlations::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::ChainParams;
use crate::spectra::Spectrum;
use crate::thermal::{self, check_temperature};

/// Control field a susceptibility is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldTag {
    Magnetic,
    Electric,
}

impl FieldTag {
    pub fn value(self, params: &ChainParams) -> f64 {
        match self {
            FieldTag::Magnetic => params.b,
            FieldTag::Electric => params.e_field,
        }
    }

    pub fn set(self, params: &ChainParams, value: f64) -> ChainParams {
        match self {
            FieldTag::Magnetic => params.with_b(value),
            FieldTag::Electric => params.with_e_field(value),
        }
    }
}

/// `tr sqrt(sqrt(rho0) rho1 sqrt(rho0))`, evaluated as the trace norm of
/// `sqrt(rho0) sqrt(rho1)` so that tiny eigenvalues are not square-rooted
/// twice.
pub fn uhlmann_fidelity(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::Dimension { expected: rho0.dim(), got: rho1.dim() });
    }
    let product = rho0.sqrt()? * rho1.sqrt()?;
    Ok(linalg::singular_values(&product)?.iter().sum())
}

/// Leading-order fidelity `exp(-beta dz^2 chi / 8)` between thermal states
/// at fields `z` and `z + dz`.
pub fn fidelity_quadratic_approx(beta: f64, dzeta: f64, chi: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta must be positive and finite"));
    }
    Ok((-beta * dzeta * dzeta * chi / 8.0).exp())
}

/// Step of the second difference at field value `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-3 * x.abs().max(1.0)
}

/// Free-energy curvature probe: spectra at `x`, `x +- h/2`, `x +- h` for one
/// field, reusable across temperatures.
#[derive(Debug, Clone)]
pub struct SusceptibilityProbe {
    h: f64,
    /// Energies at offsets `-h, -h/2, 0, h/2, h`.
    levels: [Vec<f64>; 5],
}

impl SusceptibilityProbe {
    pub fn new(params: &ChainParams, field: FieldTag) -> Result<Self> {
        params.validate()?;
        let x = field.value(params);
        let h = fd_step(x);
        let offsets = [-h, -0.5 * h, 0.0, 0.5 * h, h];
        let levels = match field {
            // The magnetic field only shifts sectors rigidly, so the displaced
            // spectra follow from one diagonalization without solver noise.
            FieldTag::Magnetic => {
                let base = Spectrum::from_params(params)?;
                offsets.map(|o| base.zeeman_shifted(o).energies().to_vec())
            }
            FieldTag::Electric => {
                let mut out: [Vec<f64>; 5] = Default::default();
                for (slot, o) in out.iter_mut().zip(offsets) {
                    *slot = Spectrum::from_params(&params.with_e_field(x + o))?.energies().to_vec();
                }
                out
            }
        };
        Ok(Self { h, levels })
    }

    /// Builds a probe from a function returning the spectrum at a field value.
    pub fn from_fn(x: f64, mut energies: impl FnMut(f64) -> Result<Vec<f64>>) -> Result<Self> {
        let h = fd_step(x);
        let mut levels: [Vec<f64>; 5] = Default::default();
        for (slot, o) in levels.iter_mut().zip([-h, -0.5 * h, 0.0, 0.5 * h, h]) {
            *slot = energies(x + o)?;
        }
        Ok(Self { h, levels })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// `-d^2F/dx^2` at temperature `t`: second central difference with one
    /// Richardson level. The ground and thermal parts of `F` are differenced
    /// separately so that small curvatures survive rounding.
    pub fn chi(&self, t: f64) -> Result<f64> {
        check_temperature(t)?;
        let mut parts = [(0.0, 0.0); 5];
        for (p, e) in parts.iter_mut().zip(&self.levels) {
            *p = thermal::free_energy_parts(e, t)?;
        }
        let second = |lo: usize, mid: usize, hi: usize, step: f64| {
            let g = parts[lo].0 - 2.0 * parts[mid].0 + parts[hi].0;
            let f = parts[lo].1 - 2.0 * parts[mid].1 + parts[hi].1;
            -(g + f) / (step * step)
        };
        let coarse = second(0, 2, 4, self.h);
        let fine = second(1, 2, 3, 0.5 * self.h);
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

/// `-d^2F/dz^2` by finite differences.
pub fn susceptibility(params: &ChainParams, field: FieldTag, t: f64) -> Result<f64> {
    check_temperature(t)?;
    SusceptibilityProbe::new(params, field)?.chi(t)
}
