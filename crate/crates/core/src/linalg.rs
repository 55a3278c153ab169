//! Dense complex helpers shared by the physics modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EIG_EPS: f64 = f64::EPSILON;
const EIG_MAX_ITER: usize = 1_000_000;

/// Eigen-decomposition of a Hermitian matrix, columns sorted by ascending
/// eigenvalue.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if dim == 1 {
        return Ok((alloc::vec![m[(0, 0)].re], CMatrix::identity(1, 1)));
    }
    let eig = SymmetricEigen::try_new(m.clone(), EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Singular values, in no particular order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    eigh(m).map(|(v, _)| v)
}

/// Largest entry-wise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues
/// below zero (round-off) are clamped.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = eigh(&hermitian_part(m))?;
    let roots = values.iter().map(|&x| Complex64::new(x.max(0.0).sqrt(), 0.0));
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(values.len(), roots));
    Ok(&vectors * diag * vectors.adjoint())
}

/// `V diag(w) V^dagger` for real weights.
pub fn weighted_projector_sum(vectors: &CMatrix, weights: &[f64]) -> CMatrix {
    let mut scaled = vectors.clone();
    for (k, &w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w);
    }
    scaled * vectors.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// `Re tr(a b)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

#[cfg(test)]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
