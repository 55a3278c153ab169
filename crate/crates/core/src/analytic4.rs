//! Closed-form solution of the four-site ring with `j1 = -j2 = j`.
//!
//! Levels are numbered 1..16 in the formulas below and stored 0-based. All
//! Boltzmann factors are shifted by the lowest level, so sums such as `z` and
//! the density-matrix coefficients are `exp(E_min / t)` times their textbook
//! values; every ratio built from them is shift-free.

use num_complex::Complex64;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::thermal::check_temperature;

/// Below this `|d|` the field-free eigenvector limits are used.
const D_ZERO: f64 = 1e-12;

/// The sixteen energies, in the closed-form numbering.
pub fn spectrum4(j: f64, b: f64, d: f64) -> [f64; 16] {
    let (j1, j2) = (j, -j);
    let r = root(j, d);
    [
        -4.0 * j1 - 4.0 * j2 - 4.0 * b,
        4.0 * j2 - 2.0 * b - 4.0 * d,
        4.0 * j2 - 2.0 * b + 4.0 * d,
        4.0 * j1 - 4.0 * j2 - 2.0 * b,
        -4.0 * j1 - 4.0 * j2 - 2.0 * b,
        2.0 * j1 + 4.0 * j2 + 2.0 * r,
        2.0 * j1 + 4.0 * j2 - 2.0 * r,
        -4.0 * j1 - 4.0 * j2,
        8.0 * j1 - 4.0 * j2,
        4.0 * j2,
        4.0 * j2,
        4.0 * j2 + 2.0 * b + 4.0 * d,
        4.0 * j2 + 2.0 * b - 4.0 * d,
        -4.0 * j1 - 4.0 * j2 + 2.0 * b,
        4.0 * j1 - 4.0 * j2 + 2.0 * b,
        -4.0 * j1 - 4.0 * j2 + 4.0 * b,
    ]
}

/// `sqrt(j1^2 + 16 j2^2 - 8 j1 j2 + 8 d^2)` at `j1 = -j2 = j`.
fn root(j: f64, d: f64) -> f64 {
    (25.0 * j * j + 8.0 * d * d).sqrt()
}

/// Amplitude parameters of the two field-mixed singlet-sector levels 6 and 7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingParams {
    pub mu: f64,
    pub lambda: f64,
    pub alpha2: f64,
    pub alpha2_mu: f64,
    pub alpha2_mu2: f64,
    pub gamma2: f64,
    pub gamma2_lambda: f64,
    pub gamma2_lambda2: f64,
}

impl MixingParams {
    pub fn new(j: f64, d: f64) -> Self {
        if d.abs() < D_ZERO {
            return Self::field_free(j);
        }
        // mu, lambda = (s -+ r) / 2d with mu * lambda = -2; take the root
        // without cancellation and derive the other from the product.
        let s = -5.0 * j;
        let r = root(j, d);
        let (mu, lambda) = if s <= 0.0 {
            let mu = (s - r) / (2.0 * d);
            (mu, -2.0 / mu)
        } else {
            let lambda = (s + r) / (2.0 * d);
            (-2.0 / lambda, lambda)
        };
        let na = 4.0 + 2.0 * mu * mu;
        let ng = 4.0 + 2.0 * lambda * lambda;
        Self {
            mu,
            lambda,
            alpha2: 1.0 / na,
            alpha2_mu: mu / na,
            alpha2_mu2: mu * mu / na,
            gamma2: 1.0 / ng,
            gamma2_lambda: lambda / ng,
            gamma2_lambda2: lambda * lambda / ng,
        }
    }

    /// Limits as `d -> 0+`. For `j > 0` `mu` diverges and `lambda` vanishes,
    /// for `j < 0` the roles swap; at `j = 0` both stay finite.
    fn field_free(j: f64) -> Self {
        let half = 0.5;
        if j > 0.0 {
            Self {
                mu: f64::NEG_INFINITY,
                lambda: 0.0,
                alpha2: 0.0,
                alpha2_mu: 0.0,
                alpha2_mu2: half,
                gamma2: 0.25,
                gamma2_lambda: 0.0,
                gamma2_lambda2: 0.0,
            }
        } else if j < 0.0 {
            Self {
                mu: 0.0,
                lambda: f64::INFINITY,
                alpha2: 0.25,
                alpha2_mu: 0.0,
                alpha2_mu2: 0.0,
                gamma2: 0.0,
                gamma2_lambda: 0.0,
                gamma2_lambda2: half,
            }
        } else {
            let s2 = 2f64.sqrt();
            Self {
                mu: -s2,
                lambda: s2,
                alpha2: 0.125,
                alpha2_mu: -s2 / 8.0,
                alpha2_mu2: 0.25,
                gamma2: 0.125,
                gamma2_lambda: s2 / 8.0,
                gamma2_lambda2: 0.25,
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma2.sqrt()
    }
}

/// Shifted Boltzmann factors `e[0..16]`, their sum and the shift.
fn weights(energies: &[f64; 16], t: f64) -> ([f64; 16], f64, f64) {
    let shift = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut e = [0.0; 16];
    for (w, &en) in e.iter_mut().zip(energies) {
        *w = (-(en - shift) / t).exp();
    }
    let z = e.iter().sum();
    (e, z, shift)
}

/// Thermal quantities of the four-site ring at one parameter point.
///
/// The two-site reduced matrices in the basis `|uu>, |ud>, |du>, |dd>` are
/// `Z rho_12 = [[a1,0,0,0],[0,b1,c1,0],[0,c1*,b1,0],[0,0,0,d1]]` and
/// `Z rho_13 = [[a2,0,0,0],[0,c2,d2,0],[0,d2,c2,0],[0,0,0,b2]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Analytic4Derived {
    pub j: f64,
    pub b: f64,
    pub d: f64,
    pub t: f64,
    pub mixing: MixingParams,
    pub energies: [f64; 16],
    /// `exp(-(E_k - shift) / t)`.
    pub weights: [f64; 16],
    pub shift: f64,
    /// Shifted partition sum.
    pub z: f64,
    pub a1: f64,
    pub b1: f64,
    pub c1: Complex64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
    /// Variant of `d2` with the level-9 weight at 1/3 and levels 14, 15
    /// entering as a difference. It disagrees with the eigenvectors and is
    /// kept only for diagnostics.
    pub d2_as_printed: f64,
    pub q: f64,
}

impl Analytic4Derived {
    /// `ln Z` without the shift.
    pub fn ln_z(&self) -> f64 {
        -self.shift / self.t + self.z.ln()
    }

    pub fn free_energy(&self) -> f64 {
        -self.t * self.ln_z()
    }
}

pub fn coeffs4(j: f64, b: f64, d: f64, t: f64) -> Result<Analytic4Derived> {
    check_temperature(t)?;
    for (name, v) in [("j", j), ("b", b), ("d", d)] {
        if !v.is_finite() {
            return Err(invalid(alloc::format!("{name} must be finite")));
        }
    }
    let energies = spectrum4(j, b, d);
    let (w, z, shift) = weights(&energies, t);
    let m = MixingParams::new(j, d);
    // 1-based access keeps the formulas readable.
    let e = |k: usize| w[k - 1];
    let s = |ks: &[usize]| ks.iter().map(|&k| w[k - 1]).sum::<f64>();
    let i = Complex64::new(0.0, 1.0);

    let a1 = e(1) + 0.5 * s(&[2, 3, 4, 5]) + m.alpha2 * e(6) + m.gamma2 * e(7) + e(8) / 6.0 + e(9) / 12.0 + 0.5 * e(10);
    let b1 = 0.25 * s(&[2, 3, 4, 5])
        + (m.alpha2 + m.alpha2_mu2) * e(6)
        + (m.gamma2 + m.gamma2_lambda2) * e(7)
        + e(8) / 3.0
        + 5.0 / 12.0 * e(9)
        + 0.5 * e(11)
        + 0.25 * s(&[12, 13, 14, 15]);
    let c1 = i * (0.25 * (e(2) - e(3))) - 0.25 * (e(4) - e(5))
        + i * (2.0 * m.alpha2_mu * e(6))
        + i * (2.0 * m.gamma2_lambda * e(7))
        + (e(8) - e(9)) / 3.0
        - i * (0.25 * (e(12) - e(13)))
        + 0.25 * (e(14) - e(15));
    let d1 =
        m.alpha2 * e(6) + m.gamma2 * e(7) + e(8) / 6.0 + e(9) / 12.0 + 0.5 * e(10) + 0.5 * s(&[12, 13, 14, 15]) + e(16);
    let a2 = e(1) + 0.5 * s(&[2, 3, 4, 5]) + m.alpha2_mu2 * e(6) + m.gamma2_lambda2 * e(7) + e(8) / 6.0 + e(9) / 3.0;
    let b2 =
        m.alpha2_mu2 * e(6) + m.gamma2_lambda2 * e(7) + e(8) / 6.0 + e(9) / 3.0 + 0.5 * s(&[12, 13, 14, 15]) + e(16);
    let c2 = 0.25 * s(&[2, 3, 4, 5])
        + 2.0 * m.alpha2 * e(6)
        + 2.0 * m.gamma2 * e(7)
        + e(8) / 3.0
        + e(9) / 6.0
        + 0.5 * (e(10) + e(11))
        + 0.25 * s(&[12, 13, 14, 15]);
    let d2_common = -0.25 * (e(2) + e(3)) + 0.25 * (e(4) + e(5))
        - 2.0 * m.alpha2 * e(6)
        - 2.0 * m.gamma2 * e(7)
        - 0.25 * (e(12) + e(13));
    let d2 = d2_common + e(8) / 3.0 + e(9) / 6.0 + 0.25 * (e(14) + e(15));
    let d2_as_printed = d2_common + (e(8) + e(9)) / 3.0 - 0.25 * (e(14) - e(15));
    let q = (e(1)
        + 0.75 * s(&[2, 3, 4, 5])
        + (2.0 * m.alpha2 + m.alpha2_mu2) * e(6)
        + (2.0 * m.gamma2 + m.gamma2_lambda2) * e(7)
        + 0.5 * s(&[8, 9, 10, 11])
        + 0.25 * s(&[12, 13, 14, 15]))
        * (0.25 * s(&[2, 3, 4, 5])
            + (2.0 * m.alpha2 + m.alpha2_mu2) * e(6)
            + (2.0 * m.gamma2 + m.gamma2_lambda2) * e(7)
            + 0.5 * s(&[8, 9, 10, 11])
            + 0.75 * s(&[12, 13, 14, 15])
            + e(16));

    Ok(Analytic4Derived {
        j,
        b,
        d,
        t,
        mixing: m,
        energies,
        weights: w,
        shift,
        z,
        a1,
        b1,
        c1,
        d1,
        a2,
        b2,
        c2,
        d2,
        d2_as_printed,
        q,
    })
}

/// Nearest- and next-nearest-neighbour concurrences `(C12, C13)`.
pub fn concurrences4(der: &Analytic4Derived) -> (f64, f64) {
    let c12 = 2.0 / der.z * (der.c1.norm() - (der.a1 * der.d1).sqrt()).max(0.0);
    let c13 = 2.0 / der.z * (der.d2.abs() - (der.a2 * der.b2).sqrt()).max(0.0);
    (c12, c13)
}

/// `2 C12^2 + C13^2`.
pub fn two_tangle4(der: &Analytic4Derived) -> f64 {
    let (c12, c13) = concurrences4(der);
    2.0 * c12 * c12 + c13 * c13
}

/// Same as [`two_tangle4`] but with the printed next-nearest coherence.
pub fn two_tangle4_as_printed(der: &Analytic4Derived) -> f64 {
    let (c12, _) = concurrences4(der);
    let c13 = 2.0 / der.z * (der.d2_as_printed.abs() - (der.a2 * der.b2).sqrt()).max(0.0);
    2.0 * c12 * c12 + c13 * c13
}

/// `4 Q / Z^2`.
pub fn one_tangle4(der: &Analytic4Derived) -> f64 {
    4.0 * der.q / (der.z * der.z)
}

/// Thermal expectation of the chirality operator.
pub fn chirality4(der: &Analytic4Derived) -> f64 {
    let e = |k: usize| der.weights[k - 1];
    let m = &der.mixing;
    4.0 / der.z * (e(2) - e(3) + 8.0 * m.alpha2_mu * e(6) + 8.0 * m.gamma2_lambda * e(7) - e(12) + e(13))
}

/// Magnetic susceptibility `-d^2F/dB^2`, written as `beta` times the
/// variance of the magnetization over level pairs.
pub fn chi_b4(j: f64, b: f64, d: f64, t: f64) -> Result<f64> {
    check_temperature(t)?;
    let (w, z, _) = weights(&spectrum4(j, b, d), t);
    let s = |ks: &[usize]| ks.iter().map(|&k| w[k - 1]).sum::<f64>();
    let e = |k: usize| w[k - 1];
    let m1 = s(&[2, 3, 4, 5]);
    let m0 = s(&[6, 7, 8, 9, 10, 11]);
    let mm1 = s(&[12, 13, 14, 15]);
    let v = e(1) * (m1 + 4.0 * m0 + 9.0 * mm1 + 16.0 * e(16))
        + e(16) * (9.0 * m1 + 4.0 * m0 + mm1)
        + (m1 + mm1) * m0
        + 4.0 * m1 * mm1;
    Ok(4.0 / (t * z * z) * v)
}

/// Electric susceptibility `-d^2F/dd^2`.
pub fn chi_e4(j: f64, b: f64, d: f64, t: f64) -> Result<f64> {
    check_temperature(t)?;
    let r2 = 25.0 * j * j + 8.0 * d * d;
    if r2 == 0.0 {
        return Err(invalid("electric susceptibility closed form is singular at j = d = 0"));
    }
    let beta = 1.0 / t;
    let (w, z, _) = weights(&spectrum4(j, b, d), t);
    let e = |k: usize| w[k - 1];
    let s = |ks: &[usize]| ks.iter().map(|&k| w[k - 1]).sum::<f64>();
    let r = r2.sqrt();
    let sg = 4.0 * d / r;
    let q = 16.0 * d * d / r2;
    let c = 25.0 * j * j / (beta * r * r2);
    let rest = s(&[1, 4, 5, 8, 9, 10, 11, 14, 15, 16]);
    let (e6, e7) = (e(6), e(7));
    let up = e(2) + e(13);
    let down = e(3) + e(12);
    let v = up
        * (e(1)
            + 2.0 * e(3)
            + e(4)
            + e(5)
            + (1.0 + sg) * e6
            + (1.0 - sg) * e7
            + s(&[8, 9, 10, 11])
            + 2.0 * e(12)
            + s(&[14, 15, 16]))
        + down
            * (e(1)
                + 2.0 * e(2)
                + e(4)
                + e(5)
                + (1.0 - sg) * e6
                + (1.0 + sg) * e7
                + s(&[8, 9, 10, 11])
                + 2.0 * e(13)
                + s(&[14, 15, 16]))
        + (q - c) * e6 * rest
        + (q + sg - c) * e6 * up
        + (q - sg - c) * e6 * down
        - c * e6 * e6
        + (2.0 * q - c) * e6 * e7
        + (q + c) * e7 * rest
        + (q - sg + c) * e7 * up
        + (q + sg + c) * e7 * down
        + (2.0 * q + c) * e7 * e6
        + c * e7 * e7;
    Ok(16.0 * beta / (z * z) * v)
}
