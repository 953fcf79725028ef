//! Householder QR and RQ factorizations with a fixed sign convention.
//!
//! Both factorizations return a square unitary factor:
//!
//! - `qr`:  A (m×n) = Q · R with Q m×m and R upper-trapezoidal,
//! - `rq`:  A (m×n) = R · Qᴴ with Q n×n and R upper-trapezoidal anchored at
//!   the bottom-right (zeros wherever i − j > m − n).
//!
//! The reflectors are followed by a diagonal phase correction so the pivot
//! entries of R come out real and non-negative; this makes the factors
//! unique for full-rank input and keeps golden outputs stable.

use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct QrFactors<S> {
    pub q: Matrix<S>,
    pub r: Matrix<S>,
}

#[derive(Debug, Clone)]
pub struct RqFactors<S> {
    pub r: Matrix<S>,
    pub q: Matrix<S>,
}

/// A Householder reflector H = I − τ v vᴴ stored as (v, τ), v[0] = 1.
struct Reflector<S> {
    v: Vec<S>,
    tau: S,
}

impl<S: Scalar> Reflector<S> {
    /// Reflector sending `x` to `(β, 0, …, 0)` with real β = ∓‖x‖ (sign
    /// opposing Re x₀ to avoid cancellation). Returns `None` when the tail
    /// of x is already zero.
    fn zeroing_tail(x: &[S]) -> Option<(Reflector<S>, S)> {
        let tail_sq: f64 = x[1..].iter().map(|e| e.abs_sq()).sum();
        if tail_sq == 0.0 {
            return None;
        }
        let alpha = x[0];
        let norm = (alpha.abs_sq() + tail_sq).sqrt();
        let beta = S::from_f64(if alpha.re() >= 0.0 { -norm } else { norm });
        let denom = alpha - beta;
        let mut v = vec![S::ONE; x.len()];
        for (vi, xi) in v[1..].iter_mut().zip(&x[1..]) {
            *vi = *xi / denom;
        }
        // H = I − τ v vᴴ maps x to βe₁ when τ = (β − ᾱ)/β (β real).
        let tau = (beta - alpha.conj()) / beta;
        Some((Reflector { v, tau }, beta))
    }

    /// m ← H m restricted to rows [r0, r0+len).
    fn apply_left(&self, m: &mut Matrix<S>, r0: usize) {
        let k = self.v.len();
        for j in 0..m.cols() {
            let mut dot = S::ZERO;
            for i in 0..k {
                dot = dot + self.v[i].conj() * m[(r0 + i, j)];
            }
            let f = self.tau * dot;
            for i in 0..k {
                m[(r0 + i, j)] = m[(r0 + i, j)] - self.v[i] * f;
            }
        }
    }

    /// m ← m Hᴴ restricted to columns [c0, c0+len). Used to accumulate the
    /// inverse of the left-applied reflector chain (H is unitary, not
    /// Hermitian, when τ is complex).
    fn apply_right_adjoint(&self, m: &mut Matrix<S>, c0: usize) {
        let k = self.v.len();
        let tau = self.tau.conj();
        for i in 0..m.rows() {
            let mut dot = S::ZERO;
            for j in 0..k {
                dot = dot + m[(i, c0 + j)] * self.v[j];
            }
            let f = dot * tau;
            for j in 0..k {
                m[(i, c0 + j)] = m[(i, c0 + j)] - f * self.v[j].conj();
            }
        }
    }
}

/// QR with full square Q and the non-negative-diagonal convention.
pub fn qr<S: Scalar>(a: &Matrix<S>) -> QrFactors<S> {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = Matrix::<S>::identity(m);
    let steps = m.min(n);
    for k in 0..steps {
        let x: Vec<S> = (k..m).map(|i| r[(i, k)]).collect();
        if let Some((h, beta)) = Reflector::zeroing_tail(&x) {
            h.apply_left(&mut r, k);
            h.apply_right_adjoint(&mut q, k);
            r[(k, k)] = beta;
        }
        for i in k + 1..m {
            r[(i, k)] = S::ZERO;
        }
    }
    // Phase correction: pivots real and non-negative.
    for k in 0..steps {
        let d = r[(k, k)];
        if d == S::ZERO {
            continue;
        }
        let phase = d.unit_phase();
        if phase == S::ONE {
            continue;
        }
        let inv = phase.conj();
        for j in k..n {
            r[(k, j)] = inv * r[(k, j)];
        }
        for i in 0..m {
            q[(i, k)] = q[(i, k)] * phase;
        }
        r[(k, k)] = S::from_f64(d.abs());
    }
    QrFactors { q, r }
}

/// RQ with full square Q: A = R · Qᴴ, zeros anchored at the lower-left.
pub fn rq<S: Scalar>(a: &Matrix<S>) -> RqFactors<S> {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = Matrix::<S>::identity(n);
    let steps = m.min(n);
    // Clear rows bottom-up with reflectors acting on columns from the right.
    for k in 0..steps {
        let row = m - 1 - k;
        let c_end = n - k;
        // Active row in reversed-conjugated coordinates.
        let x: Vec<S> = (0..c_end).map(|j| r[(row, c_end - 1 - j)].conj()).collect();
        if let Some((h, beta)) = Reflector::zeroing_tail(&x) {
            let g = right_zeroing_block(&h);
            r.apply_block_right(0, &g);
            q.apply_block_right(0, &g);
            r[(row, c_end - 1)] = beta.conj();
        }
        for j in 0..c_end - 1 {
            r[(row, j)] = S::ZERO;
        }
    }
    // Phase correction on the anchored diagonal: A = (R D)(Q D)ᴴ.
    for k in 0..steps {
        let (i, j) = (m - 1 - k, n - 1 - k);
        let d = r[(i, j)];
        if d == S::ZERO {
            continue;
        }
        let phase = d.unit_phase();
        if phase == S::ONE {
            continue;
        }
        let inv = phase.conj();
        for row in 0..m {
            r[(row, j)] = r[(row, j)] * inv;
        }
        for row in 0..n {
            q[(row, j)] = q[(row, j)] * inv;
        }
        r[(i, j)] = S::from_f64(d.abs());
    }
    RqFactors { r, q }
}

/// Transport a reflector K′ = I − τ v vᴴ, built in reversed-conjugated row
/// coordinates, back to the explicit block G = K′ᴴ conjugated by the
/// exchange permutation: G = I − τ̄ w wᴴ with w = reverse(v). Right-applying
/// G zeroes the leading entries of the targeted row.
fn right_zeroing_block<S: Scalar>(h: &Reflector<S>) -> Matrix<S> {
    let k = h.v.len();
    let mut w = vec![S::ZERO; k];
    for i in 0..k {
        w[i] = h.v[k - 1 - i];
    }
    let tau = h.tau.conj();
    let mut m = Matrix::<S>::identity(k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = m[(i, j)] - tau * w[i] * w[j].conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use num_complex::Complex64;

    fn check_qr<S: Scalar>(a: &Matrix<S>) {
        let f = qr(a);
        let recon = f.q.mul(&f.r);
        let scale = a.norm_fro().max(1.0);
        assert!(recon.sub(a).norm_fro() <= 1e-13 * scale, "A = QR failed");
        assert!(f.q.orthogonality_defect() <= 1e-13 * a.rows() as f64);
        for j in 0..a.cols().min(a.rows()) {
            for i in j + 1..a.rows() {
                assert_eq!(f.r[(i, j)], S::ZERO, "R not upper at ({i},{j})");
            }
            let d = f.r[(j, j)];
            assert!(d.im() == 0.0 && d.re() >= 0.0, "pivot convention violated");
        }
    }

    fn check_rq<S: Scalar>(a: &Matrix<S>) {
        let f = rq(a);
        let recon = f.r.mul(&f.q.adjoint());
        let scale = a.norm_fro().max(1.0);
        assert!(recon.sub(a).norm_fro() <= 1e-13 * scale, "A = RQᴴ failed");
        assert!(f.q.orthogonality_defect() <= 1e-13 * a.cols() as f64);
        let (m, n) = (a.rows() as isize, a.cols() as isize);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if (i as isize - j as isize) > m - n {
                    assert_eq!(f.r[(i, j)], S::ZERO, "R not RQ-form at ({i},{j})");
                }
            }
        }
        for t in 0..a.rows().min(a.cols()) {
            let d = f.r[(a.rows() - 1 - t, a.cols() - 1 - t)];
            assert!(d.im() == 0.0 && d.re() >= 0.0, "pivot convention violated");
        }
    }

    fn seeded_real(m: usize, n: usize, seed: u64) -> Matrix<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        Matrix::from_fn(m, n, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn seeded_complex(m: usize, n: usize, seed: u64) -> Matrix<Complex64> {
        let re = seeded_real(m, n, seed);
        let im = seeded_real(m, n, seed ^ 0xdeadbeef);
        Matrix::from_fn(m, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
    }

    #[test]
    fn qr_identity() {
        let f = qr(&Matrix::<f64>::identity(3));
        assert_eq!(f.q, Matrix::identity(3));
        assert_eq!(f.r, Matrix::identity(3));
    }

    #[test]
    fn qr_antidiagonal_permutation() {
        // For orthogonal A the non-negative-diagonal convention forces
        // Q = A and R = I.
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = qr(&a);
        assert!(f.q.sub(&a).norm_fro() < 1e-14);
        assert!(f.r.sub(&Matrix::identity(2)).norm_fro() < 1e-14);
    }

    #[test]
    fn qr_tall_zero_rows() {
        let a = seeded_real(5, 3, 7);
        let f = qr(&a);
        for i in 3..5 {
            for j in 0..3 {
                assert_eq!(f.r[(i, j)], 0.0);
            }
        }
        check_qr(&a);
    }

    #[test]
    fn rq_identity() {
        let f = rq(&Matrix::<f64>::identity(3));
        assert!(f.q.sub(&Matrix::identity(3)).norm_fro() < 1e-14);
        assert!(f.r.sub(&Matrix::identity(3)).norm_fro() < 1e-14);
    }

    #[test]
    fn rq_antidiagonal_permutation() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = rq(&a);
        assert!(f.q.sub(&a).norm_fro() < 1e-14, "{:?}", f.q);
        assert!(f.r.sub(&Matrix::identity(2)).norm_fro() < 1e-14);
    }

    #[test]
    fn qr_rq_properties_real_and_complex() {
        for seed in 0..6u64 {
            for &(m, n) in &[(4, 4), (5, 3), (3, 5), (1, 4), (4, 1), (2, 2)] {
                check_qr(&seeded_real(m, n, seed));
                check_rq(&seeded_real(m, n, seed + 100));
                check_qr(&seeded_complex(m, n, seed + 200));
                check_rq(&seeded_complex(m, n, seed + 300));
            }
        }
    }

    #[test]
    fn rq_wide_trapezoid() {
        let a = seeded_real(3, 5, 11);
        check_rq(&a);
    }
}
