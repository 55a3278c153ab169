//! Thermal density matrices, reduced states, concurrence, tangles and
//! chirality.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{self, ChainParams, OperatorMatrix};
use crate::spectra::Spectrum;
use crate::thermal::{self, GibbsState};

/// Values of the two-tangle below this count as zero.
pub const TANGLE_ZERO: f64 = 1e-12;

/// Density matrix over a subset of chain sites. `sites[0]` is the most
/// significant qubit of the matrix index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    sites: Vec<usize>,
    /// Exact eigen-decomposition when the state was built from one.
    spectral: Option<(Vec<f64>, CMatrix)>,
}

impl DensityMatrix {
    /// Wraps a matrix describing `sites`; checks only the dimension.
    pub fn new(matrix: CMatrix, sites: Vec<usize>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: matrix.nrows() });
        }
        check_site_list(&sites, usize::MAX)?;
        Ok(Self { matrix, sites, spectral: None })
    }

    /// Pure state `|psi><psi|` over sites `0..k`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        if !psi.len().is_power_of_two() || psi.len() < 2 {
            return Err(Error::Dimension { expected: psi.len().next_power_of_two().max(2), got: psi.len() });
        }
        let v = linalg::CVector::from_column_slice(psi);
        let k = psi.len().trailing_zeros() as usize;
        Self::new(&v * v.adjoint(), (0..k).collect())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Matrix square root; exact when the eigen-decomposition is known.
    pub fn sqrt(&self) -> Result<CMatrix> {
        match &self.spectral {
            Some((p, v)) => {
                let roots: Vec<f64> = p.iter().map(|x| x.max(0.0).sqrt()).collect();
                Ok(linalg::weighted_projector_sum(v, &roots))
            }
            None => linalg::sqrt_psd(&self.matrix),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eigvalsh(&linalg::hermitian_part(&self.matrix))?[0])
    }

    /// `rho_a (x) rho_b`, with `b`'s sites following `a`'s.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        DensityMatrix::new(self.matrix.kronecker(&other.matrix), sites)
    }
}

fn check_site_list(sites: &[usize], bound: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::Sites("empty site list".into()));
    }
    for (k, &s) in sites.iter().enumerate() {
        if s >= bound {
            return Err(Error::Sites(format!("site {s} out of range")));
        }
        if sites[..k].contains(&s) {
            return Err(Error::Sites(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

/// Full thermal state `sum_k P_k |k><k|` of the chain.
pub fn density_matrix(g: &GibbsState<'_>) -> Result<DensityMatrix> {
    let spec = g.spectrum();
    let n = spec.sites().ok_or_else(|| Error::Sites("spectrum dimension is not a power of two".into()))?;
    Ok(DensityMatrix {
        matrix: spec.weighted_sum(g.populations()),
        sites: (0..n).collect(),
        spectral: Some((g.populations().to_vec(), spec.states())),
    })
}

/// Traces out every site not in `keep`. The result orders its qubits as
/// listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    check_site_list(keep, usize::MAX)?;
    let total = rho.sites.len();
    let positions: Vec<usize> = keep
        .iter()
        .map(|s| {
            rho.sites
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::Sites(format!("site {s} is not described by this density matrix")))
        })
        .collect::<Result<_>>()?;
    let rest: Vec<usize> = (0..total).filter(|p| !positions.contains(p)).collect();
    let bit = |pos: usize| 1usize << (total - 1 - pos);
    let compose = |sel: &[usize], value: usize| -> usize {
        let m = sel.len();
        sel.iter().enumerate().filter(|&(k, _)| value >> (m - 1 - k) & 1 == 1).map(|(_, &p)| bit(p)).sum()
    };
    let kept_index: Vec<usize> = (0..1usize << keep.len()).map(|a| compose(&positions, a)).collect();
    let rest_index: Vec<usize> = (0..1usize << rest.len()).map(|r| compose(&rest, r)).collect();
    let dk = kept_index.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (a, &ia) in kept_index.iter().enumerate() {
        for (b, &ib) in kept_index.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &r in &rest_index {
                acc += rho.matrix[(ia | r, ib | r)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix { matrix: out, sites: keep.to_vec(), spectral: None })
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho_pair: &DensityMatrix) -> Result<f64> {
    if rho_pair.dim() != 4 {
        return Err(Error::Dimension { expected: 4, got: rho_pair.dim() });
    }
    let rho = linalg::hermitian_part(&rho_pair.matrix);
    // (sigma^y x sigma^y) rho* (sigma^y x sigma^y) reverses the basis order
    // and flips the sign of entries between even and odd parity states.
    let flip = CMatrix::from_fn(4, 4, |i, j| {
        let sign = if (i.count_ones() + j.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        rho[(3 - i, 3 - j)].conj() * sign
    });
    let root = linalg::sqrt_psd(&rho)?;
    let r = linalg::hermitian_part(&(&root * flip * &root));
    let mut lambdas: Vec<f64> = linalg::eigvalsh(&r)?.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

pub fn pair_concurrence(rho: &DensityMatrix, i: usize, j: usize) -> Result<f64> {
    concurrence(&partial_trace(rho, &[i, j])?)
}

/// Concurrence between site 0 and site `r`, for `r = 1..=n/2`.
pub fn concurrences_by_distance(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let n = rho.sites.len();
    let first = rho.sites[0];
    (1..=n / 2).map(|r| pair_concurrence(rho, first, rho.sites[r])).collect()
}

/// Number of site pairs at ring distance `r` per site.
pub fn distance_multiplicity(n: usize, r: usize) -> f64 {
    if n.is_multiple_of(2) && 2 * r == n {
        1.0
    } else {
        2.0
    }
}

/// `sum_r m_r C(r)^2` over ring distances; for four sites this is
/// `2 C12^2 + C13^2`.
pub fn two_tangle(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.sites.len();
    Ok(concurrences_by_distance(rho)?.iter().enumerate().map(|(k, c)| distance_multiplicity(n, k + 1) * c * c).sum())
}

/// `4 det rho_1` of the first site.
pub fn one_tangle(rho: &DensityMatrix) -> Result<f64> {
    let r1 = partial_trace(rho, &rho.sites[..1])?;
    let m = &r1.matrix;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    Ok((4.0 * det).clamp(0.0, 1.0))
}

/// `Re tr(rho K)`.
pub fn chirality_expectation(rho: &DensityMatrix, k: &OperatorMatrix) -> Result<f64> {
    if k.dim() != rho.dim() {
        return Err(Error::Dimension { expected: rho.dim(), got: k.dim() });
    }
    Ok(linalg::trace_product_re(&rho.matrix, k.matrix()))
}

/// Two-tangle of the chain at one temperature.
pub fn two_tangle_at(spec: &Spectrum, t: f64) -> Result<f64> {
    two_tangle(&density_matrix(&thermal::gibbs(spec, t)?)?)
}

/// Temperature above which the two-tangle vanishes, by bisection to
/// `|dT| <= tol` inside `[t_lo, t_hi]`.
pub fn threshold_temperature_tol(params: &ChainParams, t_lo: f64, t_hi: f64, tol: f64) -> Result<f64> {
    let spec = Spectrum::from_params(params)?;
    let tau = |t: f64| two_tangle_at(&spec, t);
    if !(t_lo > 0.0 && t_hi > t_lo) || tau(t_lo)? < TANGLE_ZERO || tau(t_hi)? >= TANGLE_ZERO {
        return Err(Error::NoThreshold { lo: t_lo, hi: t_hi });
    }
    let (mut lo, mut hi) = (t_lo, t_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if tau(mid)? >= TANGLE_ZERO {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`threshold_temperature_tol`] with `tol = 1e-6`.
pub fn threshold_temperature(params: &ChainParams, t_lo: f64, t_hi: f64) -> Result<f64> {
    threshold_temperature_tol(params, t_lo, t_hi, 1e-6)
}

/// All correlation observables of one thermal state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSummary {
    pub one_tangle: f64,
    pub two_tangle: f64,
    /// `C(r)` for `r = 1..=n/2`.
    pub concurrences: Vec<f64>,
    pub chirality: f64,
}

pub fn summarize(spec: &Spectrum, t: f64) -> Result<CorrelationSummary> {
    let rho = density_matrix(&thermal::gibbs(spec, t)?)?;
    let n = rho.sites.len();
    let concurrences = concurrences_by_distance(&rho)?;
    let two = concurrences.iter().enumerate().map(|(k, c)| distance_multiplicity(n, k + 1) * c * c).sum();
    let k = model::build_chirality_operator(n)?;
    Ok(CorrelationSummary {
        one_tangle: one_tangle(&rho)?,
        two_tangle: two,
        concurrences,
        chirality: chirality_expectation(&rho, &k)?,
    })
}

/// Identity matrix divided by its dimension over `sites`.
pub fn maximally_mixed(sites: Vec<usize>) -> Result<DensityMatrix> {
    let dim = 1usize << sites.len();
    DensityMatrix::new(CMatrix::identity(dim, dim).scale(1.0 / dim as f64), sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic4;
    use crate::linalg::c;
    use alloc::vec;

    fn thermal_rho(params: &ChainParams, t: f64) -> DensityMatrix {
        let s = Spectrum::from_params(params).unwrap();
        density_matrix(&thermal::gibbs(&s, t).unwrap()).unwrap()
    }

    fn singlet() -> DensityMatrix {
        let h = 0.5f64.sqrt();
        DensityMatrix::pure(&[c(0.0), c(h), c(-h), c(0.0)]).unwrap()
    }

    #[test]
    fn singlet_and_product_concurrence() {
        assert!((concurrence(&singlet()).unwrap() - 1.0).abs() < 1e-12);
        let a = DensityMatrix::pure(&[c(0.6), c(0.8)]).unwrap();
        let b = DensityMatrix::new(
            DensityMatrix::pure(&[Complex64::new(0.0, 1.0), c(0.0)]).unwrap().matrix().clone(),
            vec![1],
        )
        .unwrap();
        let prod = a.tensor(&b).unwrap();
        assert!(concurrence(&prod).unwrap() < 1e-7);
        assert!(concurrence(&maximally_mixed(vec![0, 1]).unwrap()).unwrap() == 0.0);
        assert!(concurrence(&a).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.7), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c(0.3)]),
            vec![0],
        )
        .unwrap();
        let b = maximally_mixed(vec![1, 2]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = partial_trace(&ab, &[0]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - a.matrix())) < 1e-15);
        let same = partial_trace(&ab, &[0, 1, 2]).unwrap();
        assert_eq!(same.matrix(), ab.matrix());
    }

    #[test]
    fn partial_trace_rejects_bad_sites() {
        let rho = maximally_mixed(vec![0, 1, 2]).unwrap();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[1, 1]).is_err());
        assert!(partial_trace(&rho, &[3]).is_err());
    }

    #[test]
    fn thermal_state_is_valid() {
        let p = ChainParams::new(4).with_b(1.0).with_e_field(2.0);
        let rho = thermal_rho(&p, 3.0);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() > -1e-12);
        let h = model::build_hamiltonian(&p).unwrap();
        assert!(linalg::max_abs(&linalg::commutator(rho.matrix(), h.matrix())) < 1e-10);
    }

    #[test]
    fn reduced_pair_matches_closed_form_pattern() {
        let (j, b, d, t) = (1.0, 1.0, 1.0, 10.0);
        let der = analytic4::coeffs4(j, b, d, t).unwrap();
        let rho = thermal_rho(&ChainParams::new(4).with_j(j).with_b(b).with_e_field(d), t);
        let r12 = partial_trace(&rho, &[0, 1]).unwrap();
        let m = r12.matrix().scale(der.z);
        assert!((m[(0, 0)].re - der.a1).abs() < 1e-10);
        assert!((m[(1, 1)].re - der.b1).abs() < 1e-10);
        assert!((m[(2, 2)].re - der.b1).abs() < 1e-10);
        assert!((m[(1, 2)] - der.c1).norm() < 1e-10);
        assert!((m[(3, 3)].re - der.d1).abs() < 1e-10);
        let r13 = partial_trace(&rho, &[0, 2]).unwrap();
        let m = r13.matrix().scale(der.z);
        assert!((m[(0, 0)].re - der.a2).abs() < 1e-10);
        assert!((m[(1, 1)].re - der.c2).abs() < 1e-10);
        assert!((m[(1, 2)].re - der.d2).abs() < 1e-10);
        assert!(m[(1, 2)].im.abs() < 1e-10);
        assert!((m[(3, 3)].re - der.b2).abs() < 1e-10);
    }

    #[test]
    fn nearest_neighbour_pairs_agree() {
        let rho = thermal_rho(&ChainParams::new(4).with_b(0.5).with_e_field(3.0), 1.5);
        let c01 = pair_concurrence(&rho, 0, 1).unwrap();
        let c03 = pair_concurrence(&rho, 0, 3).unwrap();
        assert!((c01 - c03).abs() < 1e-10);
        assert!(c01 > 0.0);
    }

    #[test]
    fn high_temperature_limits() {
        let rho = thermal_rho(&ChainParams::new(4).with_b(1.0).with_e_field(1.0), 1e4);
        assert!((one_tangle(&rho).unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(two_tangle(&rho).unwrap(), 0.0);
    }

    #[test]
    fn polarized_state_has_no_one_tangle() {
        let mut psi = [c(0.0); 8];
        psi[0] = c(1.0);
        let rho = DensityMatrix::pure(&psi).unwrap();
        assert_eq!(one_tangle(&rho).unwrap(), 0.0);
    }

    #[test]
    fn chirality_odd_in_field() {
        let k = model::build_chirality_operator(4).unwrap();
        let p = ChainParams::new(4).with_b(1.0);
        let plus = chirality_expectation(&thermal_rho(&p.with_e_field(1.3), 2.0), &k).unwrap();
        let minus = chirality_expectation(&thermal_rho(&p.with_e_field(-1.3), 2.0), &k).unwrap();
        let zero = chirality_expectation(&thermal_rho(&p, 2.0), &k).unwrap();
        assert!((plus + minus).abs() < 1e-12);
        assert!(zero.abs() < 1e-12);
        assert!(plus > 0.0);
    }

    #[test]
    fn threshold_needs_bracket() {
        let p = ChainParams::new(4).with_b(1.0).with_e_field(1.0);
        assert!(matches!(threshold_temperature(&p, 20.0, 30.0), Err(Error::NoThreshold { .. })));
    }
}
