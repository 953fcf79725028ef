//! Single-matrix Schur decomposition: A = Q T Qᴴ.
//!
//! Over the reals T is quasi-upper-triangular with 1×1 and 2×2 diagonal
//! blocks (each 2×2 block carries a complex-conjugate eigenvalue pair);
//! over the complex numbers T is upper-triangular. Implemented as the
//! single-edge case of the cycle reduction in [`super::pqz`]: Hessenberg
//! reduction followed by implicitly shifted QR with deflation.

use num_complex::Complex64;

use crate::error::LinalgError;
use crate::linalg::pqz::{self, IterOpts};
use crate::matrix::Matrix;
use crate::quiver::Sign;
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone)]
pub struct SchurResult<S> {
    pub q: Matrix<S>,
    pub t: Matrix<S>,
}

#[derive(Debug, Clone)]
pub struct HessenbergFactors<S> {
    pub q: Matrix<S>,
    pub h: Matrix<S>,
}

/// Field-generic Schur decomposition.
pub fn schur<S: Scalar>(a: &Matrix<S>, opts: &IterOpts) -> Result<SchurResult<S>, LinalgError<S>> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "Schur decomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.all_finite() {
        return Err(LinalgError::Contract("matrix has non-finite entries".into()));
    }
    let (mut qs, mut ts) = pqz::reduce(vec![a.clone()], vec![Sign::Forward], opts)?;
    Ok(SchurResult { q: qs.remove(0), t: ts.remove(0) })
}

/// Real Schur form: QᵀAQ = T quasi-upper-triangular.
pub fn real_schur(
    a: &Matrix<f64>,
    opts: &IterOpts,
) -> Result<SchurResult<f64>, LinalgError<f64>> {
    debug_assert_eq!(<f64 as Scalar>::FIELD, Field::Real);
    schur(a, opts)
}

/// Complex Schur form: UᴴAU = T upper-triangular.
pub fn complex_schur(
    a: &Matrix<Complex64>,
    opts: &IterOpts,
) -> Result<SchurResult<Complex64>, LinalgError<Complex64>> {
    schur(a, opts)
}

/// Householder reduction to upper-Hessenberg form: A = Q H Qᴴ.
pub fn hessenberg<S: Scalar>(a: &Matrix<S>) -> HessenbergFactors<S> {
    assert!(a.is_square(), "Hessenberg reduction needs a square matrix");
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::<S>::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<S> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|e| e.abs_sq()).sum();
        if tail == 0.0 {
            continue;
        }
        let block = pqz::unitary_zeroing_tail(&x);
        // Similarity: rows and columns k+1.. both transformed.
        h.apply_block_left(k + 1, &block);
        h.apply_block_right(k + 1, &block);
        q.apply_block_right(k + 1, &block);
        for i in k + 2..n {
            h[(i, k)] = S::ZERO;
        }
    }
    HessenbergFactors { q, h }
}

/// Read the eigenvalue multiset off a (quasi-)upper-triangular matrix.
/// 2×2 blocks are detected by a nonzero subdiagonal entry.
pub fn quasi_triangular_eigenvalues<S: Scalar>(t: &Matrix<S>) -> Vec<Complex64> {
    let n = t.rows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != S::ZERO {
            let (a, b, c, d) = (
                t[(i, i)].to_c64(),
                t[(i, i + 1)].to_c64(),
                t[(i + 1, i)].to_c64(),
                t[(i + 1, i + 1)].to_c64(),
            );
            let tr = a + d;
            let det = a * d - b * c;
            let sq = (tr * tr - 4.0 * det).sqrt();
            out.push((tr + sq) * 0.5);
            out.push((tr - sq) * 0.5);
            i += 2;
        } else {
            out.push(t[(i, i)].to_c64());
            i += 1;
        }
    }
    out
}
