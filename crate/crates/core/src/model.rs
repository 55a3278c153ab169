//! Chain Hamiltonian and auxiliary operators on the `2^n` Pauli basis.
//!
//! Basis convention: site 0 is the most significant bit of the basis index,
//! and a bit value of 0 is spin up (`sigma^z = +1`). All couplings are
//! dimensionless (units of the exchange constant) and act on Pauli matrices,
//! not spin-1/2 operators:
//!
//! ```text
//! H = -j1 sum_i s_i . s_{i+1} - j2 sum_i s_i . s_{i+2} - b sum_i s^z_i - d K
//! K = sum_i (s_i x s_{i+1})^z = sum_i (s^x_i s^y_{i+1} - s^y_i s^x_{i+1})
//! ```
//!
//! with periodic site indices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};

/// Largest supported ring.
pub const MAX_SITES: usize = 14;
pub const MIN_SITES: usize = 2;

/// Physical configuration of the periodic chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    /// Nearest-neighbour exchange.
    pub j1: f64,
    /// Next-nearest-neighbour exchange.
    pub j2: f64,
    /// Magnetic field along z.
    pub b: f64,
    /// Electric coupling `d`, the coefficient of the chirality term.
    pub e_field: f64,
}

impl ChainParams {
    /// `j1 = -j2 = 1`, no fields.
    pub fn new(n: usize) -> Self {
        Self { n, j1: 1.0, j2: -1.0, b: 0.0, e_field: 0.0 }
    }

    pub fn with_exchange(mut self, j1: f64, j2: f64) -> Self {
        self.j1 = j1;
        self.j2 = j2;
        self
    }

    /// Sets `j1 = j` and `j2 = -j`.
    pub fn with_j(self, j: f64) -> Self {
        self.with_exchange(j, -j)
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_e_field(mut self, d: f64) -> Self {
        self.e_field = d;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n)?;
        for (name, v) in [("j1", self.j1), ("j2", self.j2), ("b", self.b), ("e_field", self.e_field)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_sites(n: usize) -> Result<()> {
    if !(MIN_SITES..=MAX_SITES).contains(&n) {
        return Err(invalid(format!("site count must lie in [{MIN_SITES}, {MAX_SITES}], got {n}")));
    }
    Ok(())
}

/// Dense operator on the spin basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension { expected: matrix.nrows(), got: matrix.ncols() });
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { matrix: linalg::commutator(&self.matrix, &other.matrix) }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }
}

/// `sigma^z` eigenvalue of `site` in basis state `state`.
#[inline]
pub fn site_sz(state: usize, site: usize, n: usize) -> i32 {
    if state >> (n - 1 - site) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Total `sum_i sigma^z_i` of a basis state.
#[inline]
pub fn total_sz(state: usize, n: usize) -> i32 {
    n as i32 - 2 * state.count_ones() as i32
}

#[inline]
fn site_mask(site: usize, n: usize) -> usize {
    1 << (n - 1 - site)
}

/// Calls `emit(row, amplitude)` for every nonzero `H[row, state]`.
/// Amplitudes for the same row may be emitted more than once and must be
/// accumulated.
pub(crate) fn hamiltonian_column(params: &ChainParams, state: usize, mut emit: impl FnMut(usize, Complex64)) {
    let n = params.n;
    let mut diag = -params.b * total_sz(state, n) as f64;
    for i in 0..n {
        for (shift, weight) in [(1, -params.j1), (2, -params.j2)] {
            let j = (i + shift) % n;
            if weight == 0.0 {
                continue;
            }
            if i == j {
                diag += 3.0 * weight;
                continue;
            }
            let (mi, mj) = (site_mask(i, n), site_mask(j, n));
            let differ = (state & mi == 0) != (state & mj == 0);
            if differ {
                diag -= weight;
                emit(state ^ mi ^ mj, Complex64::new(2.0 * weight, 0.0));
            } else {
                diag += weight;
            }
        }
    }
    chirality_column(n, state, -params.e_field, &mut emit);
    if diag != 0.0 {
        emit(state, Complex64::new(diag, 0.0));
    }
}

/// Action of `scale * K` on a basis state.
fn chirality_column(n: usize, state: usize, scale: f64, emit: &mut impl FnMut(usize, Complex64)) {
    if scale == 0.0 {
        return;
    }
    for i in 0..n {
        let j = (i + 1) % n;
        if i == j {
            continue;
        }
        let (mi, mj) = (site_mask(i, n), site_mask(j, n));
        let up_i = state & mi == 0;
        let up_j = state & mj == 0;
        // (s^x s^y - s^y s^x)|up,down> = -2i |down,up>, and +2i for the reverse.
        match (up_i, up_j) {
            (true, false) => emit(state ^ mi ^ mj, Complex64::new(0.0, -2.0 * scale)),
            (false, true) => emit(state ^ mi ^ mj, Complex64::new(0.0, 2.0 * scale)),
            _ => {}
        }
    }
}

pub fn build_hamiltonian(params: &ChainParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let dim = params.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        hamiltonian_column(params, col, |row, amp| m[(row, col)] += amp);
    }
    Ok(OperatorMatrix { matrix: m })
}

pub fn build_chirality_operator(n: usize) -> Result<OperatorMatrix> {
    check_sites(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        chirality_column(n, col, 1.0, &mut |row, amp| m[(row, col)] += amp);
    }
    Ok(OperatorMatrix { matrix: m })
}

pub fn build_total_sz(n: usize) -> Result<OperatorMatrix> {
    check_sites(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = Complex64::new(total_sz(s, n) as f64, 0.0);
    }
    Ok(OperatorMatrix { matrix: m })
}

/// Permutation matrix of the cyclic shift `site i -> site i+1`.
pub fn build_translation(n: usize) -> Result<OperatorMatrix> {
    check_sites(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut t = 0;
        for site in 0..n {
            if s & site_mask(site, n) != 0 {
                t |= site_mask((site + 1) % n, n);
            }
        }
        m[(t, s)] = Complex64::new(1.0, 0.0);
    }
    Ok(OperatorMatrix { matrix: m })
}

/// Basis states sharing one total `sigma^z` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub sz: i32,
    pub states: Vec<usize>,
}

/// All magnetization sectors of an `n`-site ring, from `sz = n` down to `-n`.
pub fn sector_bases(n: usize) -> Vec<SectorBasis> {
    let mut sectors: Vec<SectorBasis> =
        (0..=n).map(|flips| SectorBasis { sz: n as i32 - 2 * flips as i32, states: Vec::new() }).collect();
    for s in 0..(1usize << n) {
        sectors[s.count_ones() as usize].states.push(s);
    }
    sectors
}

/// The Hamiltonian restricted to one magnetization sector.
pub fn sector_hamiltonian(params: &ChainParams, sector: &SectorBasis) -> Result<CMatrix> {
    params.validate()?;
    let dim = sector.states.len();
    let mut local = vec![usize::MAX; params.dim()];
    for (k, &s) in sector.states.iter().enumerate() {
        local[s] = k;
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (col, &state) in sector.states.iter().enumerate() {
        hamiltonian_column(params, state, |row, amp| {
            let r = local[row];
            debug_assert!(r != usize::MAX, "Hamiltonian leaked out of its Sz sector");
            m[(r, col)] += amp;
        });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eigvalsh};

    // Independent Kronecker-product construction used as an oracle.
    fn pauli(k: usize) -> CMatrix {
        let z = Complex64::new(0.0, 0.0);
        let o = c(1.0);
        let i = Complex64::new(0.0, 1.0);
        match k {
            0 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            1 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    fn embed(n: usize, ops: &[(usize, CMatrix)]) -> CMatrix {
        let mut m = CMatrix::identity(1, 1);
        for site in 0..n {
            let mut factor = CMatrix::identity(2, 2);
            for (s, op) in ops {
                if *s == site {
                    factor = &factor * op;
                }
            }
            m = m.kronecker(&factor);
        }
        m
    }

    fn kron_hamiltonian(p: &ChainParams) -> CMatrix {
        let n = p.n;
        let dim = 1 << n;
        let mut h = CMatrix::zeros(dim, dim);
        for i in 0..n {
            for a in 0..3 {
                h -= embed(n, &[(i, pauli(a)), ((i + 1) % n, pauli(a))]).scale(p.j1);
                h -= embed(n, &[(i, pauli(a)), ((i + 2) % n, pauli(a))]).scale(p.j2);
            }
            h -= embed(n, &[(i, pauli(2))]).scale(p.b);
            let j = (i + 1) % n;
            let k = embed(n, &[(i, pauli(0)), (j, pauli(1))]) - embed(n, &[(i, pauli(1)), (j, pauli(0))]);
            h -= k.scale(p.e_field);
        }
        h
    }

    #[test]
    fn matches_kronecker_construction() {
        for n in 2..=5 {
            let p = ChainParams::new(n).with_exchange(0.7, -1.3).with_b(0.4).with_e_field(1.9);
            let h = build_hamiltonian(&p).unwrap();
            let diff = linalg::max_abs(&(h.matrix() - kron_hamiltonian(&p)));
            assert!(diff < 1e-13, "n={n}: {diff}");
        }
    }

    #[test]
    fn fully_polarized_diagonal_element() {
        let p = ChainParams::new(4).with_b(1.0).with_e_field(2.5);
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h.get(0, 0).re, -4.0);
    }

    #[test]
    fn zero_couplings_give_zero_matrix() {
        let p = ChainParams::new(4).with_exchange(0.0, 0.0);
        assert_eq!(build_hamiltonian(&p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_sites() {
        assert!(matches!(build_hamiltonian(&ChainParams::new(1)), Err(Error::InvalidParameter(_))));
        assert!(build_hamiltonian(&ChainParams::new(15)).is_err());
        assert!(build_chirality_operator(1).is_err());
        assert!(build_total_sz(15).is_err());
        assert!(build_hamiltonian(&ChainParams::new(4).with_b(f64::NAN)).is_err());
    }

    #[test]
    fn chirality_is_traceless_imaginary_hermitian() {
        for n in 2..=6 {
            let k = build_chirality_operator(n).unwrap();
            assert_eq!(k.trace(), c(0.0));
            assert_eq!(k.get(0, 0), c(0.0));
            assert!(k.hermiticity_defect() < 1e-15);
            assert!(k.matrix().iter().all(|z| z.re == 0.0));
        }
    }

    #[test]
    fn chirality_spectrum_symmetric_for_four_sites() {
        let k = build_chirality_operator(4).unwrap();
        let ev = eigvalsh(k.matrix()).unwrap();
        let m = ev.len();
        for i in 0..m {
            assert!((ev[i] + ev[m - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn total_sz_two_sites() {
        let s = build_total_sz(2).unwrap();
        let d: Vec<f64> = (0..4).map(|i| s.get(i, i).re).collect();
        assert_eq!(d, vec![2.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn sector_blocks_reassemble_full_matrix() {
        let p = ChainParams::new(5).with_b(0.3).with_e_field(0.8);
        let full = build_hamiltonian(&p).unwrap();
        for sector in sector_bases(5) {
            let block = sector_hamiltonian(&p, &sector).unwrap();
            for (a, &sa) in sector.states.iter().enumerate() {
                for (b, &sb) in sector.states.iter().enumerate() {
                    assert_eq!(block[(a, b)], full.get(sa, sb));
                }
            }
        }
    }

    #[test]
    fn field_enters_linearly_through_chirality() {
        let p = ChainParams::new(4).with_b(1.0);
        let h0 = build_hamiltonian(&p).unwrap();
        let h1 = build_hamiltonian(&p.with_e_field(2.75)).unwrap();
        let k = build_chirality_operator(4).unwrap();
        let diff = linalg::max_abs(&(h1.matrix() - h0.matrix() + k.matrix().scale(2.75)));
        assert!(diff <= 1e-14);
    }
}
