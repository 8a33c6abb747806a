//! Small dense helpers shared by every module: PSD tests, matrix square
//! roots, norms and block assembly.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

pub type Complex64 = nalgebra::Complex<f64>;

use crate::error::{Error, Result};

/// Relative threshold of the shared PSD rule: a symmetric (or Hermitian)
/// matrix `A` counts as PSD when `eigmin(A) >= -PSD_TOL * (1 + ||A||_inf)`.
pub const PSD_TOL: f64 = 1e-10;

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm_c(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Rejects non-square matrices and matrices whose asymmetry exceeds
/// `rel_tol * max(1, max|m_ij|)`.
pub fn check_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let asym = asymmetry(m);
    if asym > rel_tol * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn hermitian_min_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(h).first().copied().unwrap_or(0.0)
}

pub fn psd_threshold(norm: f64) -> f64 {
    -PSD_TOL * (1.0 + norm)
}

pub fn is_psd(m: &DMatrix<f64>) -> bool {
    min_eigenvalue(m) >= psd_threshold(inf_norm(m))
}

pub fn is_psd_hermitian(h: &DMatrix<Complex64>) -> bool {
    hermitian_min_eigenvalue(h) >= psd_threshold(inf_norm_c(h))
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.is_square() && Cholesky::new(symmetrize(m)).is_some()
}

pub fn require_positive_definite(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(symmetrize(m)).ok_or_else(|| Error::NotPositiveDefinite { what: what.into() })
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn inverse_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = require_positive_definite(m, what)?;
    Ok(symmetrize(&chol.inverse()))
}

/// `f(A) = V f(Λ) Vᵀ` for symmetric `A`.
pub fn sym_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let vals = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    symmetrize(&(v * DMatrix::from_diagonal(&vals) * v.transpose()))
}

pub fn sqrt_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    require_positive_definite(m, what)?;
    Ok(sym_function(m, f64::sqrt))
}

pub fn inv_sqrt_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    require_positive_definite(m, what)?;
    Ok(sym_function(m, |x| 1.0 / x.sqrt()))
}

pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn block(m: &DMatrix<f64>, r0: usize, c0: usize, nr: usize, nc: usize) -> DMatrix<f64> {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// `P m Pᵀ` for the permutation sending new index `i` to old index `perm[i]`.
pub fn permute_symmetric(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    DMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])])
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Condition number of a symmetric positive-definite matrix (ratio of
/// extreme eigenvalues); infinite when the smallest one is not positive.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let ev = sym_eigenvalues(m);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}
