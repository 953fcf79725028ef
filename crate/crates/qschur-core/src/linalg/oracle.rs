//! Independent spectrum oracle for signed cycles.
//!
//! The signed cycle product Π M_t^{s_t} is embedded into one block-cyclic
//! generalized eigenproblem A z = θ B z of size p·n: edge t contributes the
//! block row
//!
//!   Forward:  M_t x_t = θ x_{t+1}      (M_t in A, identity in B)
//!   Inverse:  x_t    = θ M_t x_{t+1}   (identity in A, M_t in B)
//!
//! so a full trip around the cycle gives (Π M^s) x_0 = θ^p x_0. The θ's are
//! computed by one complex Schur decomposition of B⁻¹A and their p-th powers
//! are clustered into groups of p. This costs O((p·n)³) but shares nothing
//! with the periodic QZ path, which is exactly what makes it a useful
//! cross-check.

use num_complex::Complex64;

use crate::error::LinalgError;
use crate::linalg::lu::{condition_estimate, lu_decompose};
use crate::linalg::pqz::IterOpts;
use crate::linalg::schur::{complex_schur, quasi_triangular_eigenvalues};
use crate::matrix::Matrix;
use crate::quiver::Sign;
use crate::scalar::Scalar;

use super::periodic::Signature;

#[derive(Debug, Clone)]
pub struct CycleSpectrum {
    /// Eigenvalues of the signed cycle product, when well defined.
    pub eigenvalues: Vec<Complex64>,
    /// Set when a matrix on an inverse edge is singular; the formal product
    /// then has infinite/indefinite parts and `eigenvalues` is empty.
    pub singular_inverse_edge: bool,
    /// Product of per-edge condition estimates; +∞ when any edge matrix is
    /// singular. Spectrum comparisons should be advisory above ~1e8.
    pub condition_estimate: f64,
}

pub fn cyclic_embedding_oracle<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &Signature,
) -> Result<CycleSpectrum, LinalgError<Complex64>> {
    let p = mats.len();
    if p == 0 || signs.len() != p {
        return Err(LinalgError::Contract("cycle and signature sizes differ or are empty".into()));
    }
    let n = mats[0].rows();
    for m in mats {
        if !m.is_square() || m.rows() != n {
            return Err(LinalgError::DimensionMismatch(
                "oracle needs square matrices of equal dimension".into(),
            ));
        }
    }

    let cond = mats.iter().map(|m| condition_estimate(m)).product::<f64>();

    for (t, m) in mats.iter().enumerate() {
        if signs.signs[t] == Sign::Inverse && lu_decompose(&m.to_complex()).is_singular() {
            return Ok(CycleSpectrum {
                eigenvalues: Vec::new(),
                singular_inverse_edge: true,
                condition_estimate: cond,
            });
        }
    }

    let dim = p * n;
    let mut a = Matrix::<Complex64>::zeros(dim, dim);
    let mut b = Matrix::<Complex64>::zeros(dim, dim);
    for t in 0..p {
        let next = (t + 1) % p;
        match signs.signs[t] {
            Sign::Forward => {
                a.set_block(t * n, t * n, &mats[t].to_complex());
                b.set_block(t * n, next * n, &Matrix::identity(n));
            }
            Sign::Inverse => {
                a.set_block(t * n, t * n, &Matrix::identity(n));
                b.set_block(t * n, next * n, &mats[t].to_complex());
            }
        }
    }
    let c = lu_decompose(&b).solve(&a);
    let schur = complex_schur(&c, &IterOpts::default())?;
    let thetas = quasi_triangular_eigenvalues(&schur.t);

    // θ-spectrum is invariant under θ ↦ θ·e^{2πi/p}; the p-th powers come in
    // groups of p copies of each product eigenvalue. Cluster greedily by
    // distance: copies of one eigenvalue differ only at rounding level,
    // while sorting by components alone can interleave conjugate pairs.
    let mut powered: Vec<Complex64> = thetas.iter().map(|t| t.powu(p as u32)).collect();
    powered.sort_by(|x, y| {
        x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
    });
    let mut used = vec![false; powered.len()];
    let mut eigenvalues = Vec::with_capacity(n);
    for start in 0..powered.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let anchor = powered[start];
        let mut cluster = vec![anchor];
        for _ in 1..p {
            let mut best: Option<(usize, f64)> = None;
            for (i, z) in powered.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (z - anchor).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            let (i, _) = best.expect("pn values cluster into n groups of p");
            used[i] = true;
            cluster.push(powered[i]);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for z in &cluster {
            sum += z;
        }
        eigenvalues.push(sum / cluster.len() as f64);
    }
    Ok(CycleSpectrum { eigenvalues, singular_inverse_edge: false, condition_estimate: cond })
}
