//! Exact-diagonalization toolkit for a frustrated spin-1/2 ring whose
//! vector chirality couples to an electric field, and for Otto cycles that
//! use it as a working medium.
//!
//! The crate is `no_std` (it needs `alloc`). Energies, fields and
//! temperatures are dimensionless, in units of the exchange constant with
//! `k_B = 1`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic4;
pub mod correlations;
mod error;
pub mod linalg;
pub mod model;
pub mod otto;
pub mod response;
pub mod semiclassical;
pub mod spectra;
pub mod thermal;

pub use correlations::DensityMatrix;
pub use error::{Error, Result};
pub use model::{ChainParams, OperatorMatrix};
pub use otto::{CycleMode, CycleResult, CycleSpec};
pub use response::FieldTag;
pub use spectra::{LevelMap, Spectrum};
pub use thermal::GibbsState;
