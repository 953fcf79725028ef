//! Periodic Schur decomposition of a signed cycle of square matrices.
//!
//! Given matrices M_0..M_{p−1} around a cycle (see [`super::pqz`] for the
//! vertex/edge convention) the reduction produces per-vertex unitary factors
//! Q_0..Q_{p−1} and reduced matrices T_t with
//!
//!   T_t = Q_{t+1}ᴴ M_t Q_t   (Forward edges)
//!   T_t = Q_tᴴ M_t Q_{t+1}   (Inverse edges)
//!
//! Every T_t is upper-triangular except T_0, the quasi-block carrier, which
//! over the reals may hold 2×2 diagonal blocks with complex-pair
//! eigenvalues. A cycle of length one with a forward sign is exactly the
//! single-matrix Schur decomposition and is delegated there.

use crate::error::LinalgError;
use crate::linalg::pqz::{self, IterOpts};
use crate::linalg::schur::schur;
use crate::matrix::Matrix;
use crate::quiver::Sign;
use crate::scalar::Scalar;

/// Per-cycle-edge orientation signs relative to the traversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub signs: Vec<Sign>,
}

impl Signature {
    pub fn new(signs: Vec<Sign>) -> Self {
        Signature { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicSchurFactors<S> {
    /// One unitary per cycle vertex.
    pub q: Vec<Matrix<S>>,
    /// One reduced matrix per cycle edge.
    pub t: Vec<Matrix<S>>,
    /// Which T may carry 2×2 blocks (always 0: the first cycle edge).
    pub quasi_block_index: usize,
    pub signatures: Signature,
}

/// Reduce a signed cycle of square, equal-dimension matrices.
pub fn periodic_schur<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &Signature,
    opts: &IterOpts,
) -> Result<PeriodicSchurFactors<S>, LinalgError<S>> {
    let p = mats.len();
    if p == 0 {
        return Err(LinalgError::Contract("empty cycle".into()));
    }
    if signs.len() != p {
        return Err(LinalgError::Contract(format!(
            "{} matrices but {} signs",
            p,
            signs.len()
        )));
    }
    let n = mats[0].rows();
    for (i, m) in mats.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "cycle position {i}: expected {n}x{n}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.all_finite() {
            return Err(LinalgError::Contract(format!(
                "cycle position {i}: non-finite entries"
            )));
        }
    }

    if p == 1 {
        if signs.signs[0] != Sign::Forward {
            return Err(LinalgError::Contract(
                "a loop edge always agrees with its traversal".into(),
            ));
        }
        let r = schur(&mats[0], opts)?;
        return Ok(PeriodicSchurFactors {
            q: vec![r.q],
            t: vec![r.t],
            quasi_block_index: 0,
            signatures: signs.clone(),
        });
    }

    if signs.signs[0] == Sign::Forward {
        let (q, t) = pqz::reduce(mats.to_vec(), signs.signs.clone(), opts)?;
        return Ok(PeriodicSchurFactors {
            q,
            t,
            quasi_block_index: 0,
            signatures: signs.clone(),
        });
    }

    // Inverse carrier: re-base the traversal at vertex 1 and walk the cycle
    // the other way. Edge 0 keeps its role as the carrier but now agrees
    // with the traversal; edge j (j ≥ 1) of the flipped problem is edge
    // p − j of the original with its sign negated.
    let mut fmats = Vec::with_capacity(p);
    let mut fsigns = Vec::with_capacity(p);
    fmats.push(mats[0].clone());
    fsigns.push(Sign::Forward);
    for j in 1..p {
        fmats.push(mats[p - j].clone());
        fsigns.push(signs.signs[p - j].flip());
    }
    let (fq, ft) = pqz::reduce(fmats, fsigns, opts)?;
    // Flipped vertex j is original vertex (1 − j) mod p.
    let mut q: Vec<Matrix<S>> = vec![Matrix::zeros(0, 0); p];
    let mut t: Vec<Matrix<S>> = vec![Matrix::zeros(0, 0); p];
    for (j, m) in fq.into_iter().enumerate() {
        let orig = (1 + p - j) % p;
        q[orig] = m;
    }
    for (j, m) in ft.into_iter().enumerate() {
        let orig = if j == 0 { 0 } else { p - j };
        t[orig] = m;
    }
    Ok(PeriodicSchurFactors { q, t, quasi_block_index: 0, signatures: signs.clone() })
}

/// Residual of the transformation law on edge `e` of a cycle, given the
/// original matrices. Test/verification helper shared across the crate.
pub fn periodic_residual<S: Scalar>(
    original: &[Matrix<S>],
    factors: &PeriodicSchurFactors<S>,
    e: usize,
) -> f64 {
    let p = original.len();
    let (left, right) = match factors.signatures.signs[e] {
        Sign::Forward => ((e + 1) % p, e),
        Sign::Inverse => (e, (e + 1) % p),
    };
    let recon = factors.q[left].adjoint().mul(&original[e]).mul(&factors.q[right]);
    recon.sub(&factors.t[e]).norm_fro()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::linalg::schur::quasi_triangular_eigenvalues;

    fn seeded(n: usize, seed: u64) -> Matrix<f64> {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(99);
        Matrix::from_fn(n, n, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn all_upper<S: Scalar>(t: &Matrix<S>) -> bool {
        (0..t.rows()).all(|i| (0..i.min(t.cols())).all(|j| t[(i, j)] == S::ZERO))
    }

    fn check_cycle(mats: &[Matrix<f64>], signs: &Signature) -> PeriodicSchurFactors<f64> {
        let f = periodic_schur(mats, signs, &IterOpts::default()).expect("periodic_schur");
        let scale: f64 = mats.iter().map(|m| m.norm_fro()).fold(1.0_f64, f64::max);
        for e in 0..mats.len() {
            assert!(
                periodic_residual(mats, &f, e) <= 1e-10 * scale,
                "residual too big on edge {e}"
            );
        }
        for q in &f.q {
            assert!(q.orthogonality_defect() <= 1e-12 * q.rows() as f64);
        }
        for (e, t) in f.t.iter().enumerate() {
            if e != f.quasi_block_index {
                assert!(all_upper(t), "edge {e} not triangular");
            }
        }
        f
    }

    #[test]
    fn identity_loop() {
        let f = periodic_schur(
            &[Matrix::<f64>::identity(4)],
            &Signature::new(vec![Sign::Forward]),
            &IterOpts::default(),
        )
        .unwrap();
        assert!(f.t[0].sub(&Matrix::identity(4)).norm_fro() < 1e-14);
        assert!(f.q[0].sub(&Matrix::identity(4)).norm_fro() < 1e-14);
    }

    #[test]
    fn diagonal_pencil_stays_diagonal() {
        // signs (+1, −1), A1 = diag(2,3), A2 = I: generalized eigenvalues {2, 3}.
        let a1 = Matrix::diag(&[2.0, 3.0]);
        let a2 = Matrix::<f64>::identity(2);
        let f = check_cycle(
            &[a1, a2],
            &Signature::new(vec![Sign::Forward, Sign::Inverse]),
        );
        let mut gen: Vec<f64> = (0..2).map(|i| f.t[0][(i, i)] / f.t[1][(i, i)]).collect();
        gen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((gen[0] - 2.0).abs() < 1e-12 && (gen[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_square_pencil() {
        for seed in 0..4 {
            let a1 = seeded(5, seed * 3 + 1);
            let a2 = seeded(5, seed * 3 + 2);
            check_cycle(
                &[a1, a2],
                &Signature::new(vec![Sign::Forward, Sign::Inverse]),
            );
        }
    }

    #[test]
    fn random_forward_cycles() {
        for p in [2usize, 3, 4, 5] {
            for seed in 0..3 {
                let mats: Vec<Matrix<f64>> =
                    (0..p).map(|t| seeded(4, seed * 17 + t as u64)).collect();
                check_cycle(&mats, &Signature::new(vec![Sign::Forward; p]));
            }
        }
    }

    #[test]
    fn mixed_signs_cycle() {
        for seed in 0..3 {
            let mats: Vec<Matrix<f64>> = (0..4).map(|t| seeded(3, seed * 29 + t as u64)).collect();
            let signs = Signature::new(vec![
                Sign::Forward,
                Sign::Inverse,
                Sign::Forward,
                Sign::Inverse,
            ]);
            check_cycle(&mats, &signs);
        }
    }

    #[test]
    fn inverse_carrier_is_rebased() {
        for seed in 0..3 {
            let mats: Vec<Matrix<f64>> = (0..3).map(|t| seeded(4, seed * 11 + t as u64)).collect();
            let signs = Signature::new(vec![Sign::Inverse, Sign::Forward, Sign::Forward]);
            check_cycle(&mats, &signs);
        }
    }

    #[test]
    fn complex_cycle_fully_triangular() {
        for seed in 0..3 {
            let mats: Vec<Matrix<Complex64>> = (0..3)
                .map(|t| {
                    let re = seeded(4, seed * 5 + t as u64);
                    let im = seeded(4, seed * 5 + t as u64 + 100);
                    Matrix::from_fn(4, 4, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
                })
                .collect();
            let signs = Signature::new(vec![Sign::Forward; 3]);
            let f = periodic_schur(&mats, &signs, &IterOpts::default()).unwrap();
            for t in &f.t {
                assert!(all_upper(t), "complex T must be strictly triangular");
            }
            for e in 0..3 {
                assert!(periodic_residual(&mats, &f, e) <= 1e-10 * 10.0);
            }
        }
    }

    #[test]
    fn product_spectrum_preserved_three_cycle() {
        let mats: Vec<Matrix<f64>> = (0..3).map(|t| seeded(4, 7 + t as u64)).collect();
        let signs = Signature::new(vec![Sign::Forward; 3]);
        let f = check_cycle(&mats, &signs);
        let prod_a = mats[2].mul(&mats[1]).mul(&mats[0]);
        let prod_t = f.t[2].mul(&f.t[1]).mul(&f.t[0]);
        let mut ea = quasi_triangular_eigenvalues(
            &crate::linalg::schur::schur(&prod_a.to_complex(), &IterOpts::default())
                .unwrap()
                .t,
        );
        let mut et = quasi_triangular_eigenvalues(&prod_t);
        let key = |z: &Complex64| (z.re, z.im);
        ea.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        et.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, t) in ea.iter().zip(&et) {
            assert!((a - t).norm() <= 1e-8 * a.norm().max(1.0), "{a} vs {t}");
        }
    }
}
