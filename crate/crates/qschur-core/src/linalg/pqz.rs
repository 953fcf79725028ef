//! Shifted periodic QZ iteration on a cycle of square matrices.
//!
//! The cycle is described by matrices M_0..M_{p−1} and signs: vertex t sits
//! between edges t−1 and t, edge t connects vertex t to vertex (t+1) mod p.
//! A `Forward` edge carries a map V_t → V_{t+1} (rows at t+1, columns at t);
//! an `Inverse` edge carries a map V_{t+1} → V_t. The formal cycle product
//! based at vertex 0 is
//!
//!   P = M_{p−1}^{s_{p−1}} ⋯ M_1^{s_1} · M_0,      s = ±1,
//!
//! and the reduction finds per-vertex unitary Q_t such that every
//! transformed edge matrix is upper-triangular, except edge 0 (the carrier)
//! which stays quasi-upper-triangular in the real field.
//!
//! Three phases, in the classical shape:
//!  1. a finite QR/RQ chain makes edges 1..p−1 triangular,
//!  2. Givens rotations chased around the cycle make the carrier
//!     upper-Hessenberg,
//!  3. implicitly shifted sweeps (Francis double shift over ℝ, single
//!     Wilkinson shift over ℂ) with deflation finish the job.
//!
//! The caller guarantees `signs[0] == Forward`; the public wrapper in
//! `periodic.rs` re-bases inverse carriers.

use crate::error::{LinalgError, PartialReduction};
use crate::linalg::householder::{qr, rq};
use crate::matrix::Matrix;
use crate::quiver::Sign;
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone)]
pub struct IterOpts {
    /// Total sweep budget; `None` means 30·n.
    pub max_sweeps: Option<usize>,
}

impl Default for IterOpts {
    fn default() -> Self {
        IterOpts { max_sweeps: None }
    }
}

/// How often a stalled window falls back to an exceptional shift.
const EXCEPTIONAL_EVERY: usize = 10;
/// Attempts to resolve one 2×2 window before giving up.
const MAX_SPLIT_ATTEMPTS: usize = 30;

pub(crate) struct CycleState<S: Scalar> {
    p: usize,
    n: usize,
    pub mats: Vec<Matrix<S>>,
    signs: Vec<Sign>,
    pub q: Vec<Matrix<S>>,
}

impl<S: Scalar> CycleState<S> {
    pub fn new(mats: Vec<Matrix<S>>, signs: Vec<Sign>) -> Self {
        let p = mats.len();
        let n = mats[0].rows();
        debug_assert!(mats.iter().all(|m| m.rows() == n && m.cols() == n));
        debug_assert_eq!(signs[0], Sign::Forward);
        let q = (0..p).map(|_| Matrix::identity(n)).collect();
        CycleState { p, n, mats, signs, q }
    }

    fn row_vertex(&self, e: usize) -> usize {
        match self.signs[e] {
            Sign::Forward => (e + 1) % self.p,
            Sign::Inverse => e,
        }
    }

    fn col_vertex(&self, e: usize) -> usize {
        match self.signs[e] {
            Sign::Forward => e,
            Sign::Inverse => (e + 1) % self.p,
        }
    }

    /// Change basis at vertex `w` by the small unitary `u` acting on
    /// coordinates [pos, pos+k): row sides get uᴴ·, column sides ·u.
    fn apply_at(&mut self, w: usize, pos: usize, u: &Matrix<S>) {
        for e in 0..self.p {
            if self.row_vertex(e) == w {
                self.mats[e].apply_block_left(pos, u);
            }
            if self.col_vertex(e) == w {
                self.mats[e].apply_block_right(pos, u);
            }
        }
        self.q[w].apply_block_right(pos, u);
    }

    /// Full-size basis change at vertex `w` (used by the chain phase).
    fn absorb(&mut self, w: usize, u: &Matrix<S>) {
        self.apply_at(w, 0, u);
    }

    /// Restore upper-triangularity of the k×k diagonal block of edge `e`
    /// after it was disturbed at vertex `hit`, and emit the compensating
    /// transform at the opposite vertex.
    fn restore_block(&mut self, e: usize, pos: usize, k: usize, hit: usize) -> (usize, Matrix<S>) {
        let block = self.mats[e].block(pos, pos + k, pos, pos + k);
        if self.col_vertex(e) == hit {
            // Columns were mixed: lower fill inside the block; clear with a
            // left factor emitted at the row vertex.
            let f = qr(&block);
            (self.row_vertex(e), f.q)
        } else {
            debug_assert_eq!(self.row_vertex(e), hit);
            let f = rq(&block);
            (self.col_vertex(e), f.q)
        }
    }

    /// Zero the strictly-lower part of the k×k diagonal block of edge `e`
    /// exactly (entries are at rounding level after a restore).
    fn zero_block_lower(&mut self, e: usize, pos: usize, k: usize) {
        for i in 1..k {
            for j in 0..i {
                self.mats[e][(pos + i, pos + j)] = S::ZERO;
            }
        }
    }

    /// Propagate a disturbance created at vertex 1 (the carrier's row side)
    /// around the chain; the final compensation lands on the carrier's
    /// columns at vertex 0.
    fn chase_row_to_col(&mut self, pos: usize, k: usize) {
        for e in 1..self.p {
            let (w, u) = self.restore_block(e, pos, k, e);
            self.apply_at(w, pos, &u);
            self.zero_block_lower(e, pos, k);
        }
    }

    /// Propagate a disturbance created at vertex 0 (the carrier's column
    /// side) around the chain the other way; the final compensation lands on
    /// the carrier's rows at vertex 1.
    fn chase_col_to_row(&mut self, pos: usize, k: usize) {
        for e in (1..self.p).rev() {
            let (w, u) = self.restore_block(e, pos, k, (e + 1) % self.p);
            self.apply_at(w, pos, &u);
            self.zero_block_lower(e, pos, k);
        }
    }

    /// Finite phase 1: make edges 1..p−1 upper-triangular. Walks the chain
    /// once, fixing one vertex factor per edge; vertex 1 is the seed.
    pub fn chain_triangularize(&mut self) {
        for e in 1..self.p {
            match self.signs[e] {
                Sign::Forward => {
                    let f = qr(&self.mats[e]);
                    self.absorb((e + 1) % self.p, &f.q);
                    self.mats[e] = f.r;
                }
                Sign::Inverse => {
                    let f = rq(&self.mats[e]);
                    self.absorb((e + 1) % self.p, &f.q);
                    self.mats[e] = f.r;
                }
            }
        }
    }

    /// Finite phase 2: reduce the carrier to upper-Hessenberg form with
    /// Givens rotations chased around the cycle.
    pub fn hessenberg_carrier(&mut self) {
        let n = self.n;
        let wr = self.row_vertex(0);
        for j in 0..n.saturating_sub(2) {
            for i in (j + 2..n).rev() {
                if self.mats[0][(i, j)] == S::ZERO {
                    continue;
                }
                let g = givens_col(self.mats[0][(i - 1, j)], self.mats[0][(i, j)]);
                self.apply_at(wr, i - 1, &g);
                self.mats[0][(i, j)] = S::ZERO;
                if self.p > 1 {
                    self.chase_row_to_col(i - 1, 2);
                }
            }
        }
    }

    /// Leading or trailing window block of the formal product, computed from
    /// the k×k diagonal blocks of all factors. Inverse edges contribute the
    /// inverse of their (triangular) block; `None` when such a block is
    /// numerically singular.
    fn product_block(&self, pos: usize, k: usize) -> Option<Matrix<S>> {
        let mut acc = self.mats[0].block(pos, pos + k, pos, pos + k);
        for e in 1..self.p {
            let b = self.mats[e].block(pos, pos + k, pos, pos + k);
            let factor = match self.signs[e] {
                Sign::Forward => b,
                Sign::Inverse => tri_inverse(&b)?,
            };
            acc = factor.mul(&acc);
        }
        if acc.all_finite() {
            Some(acc)
        } else {
            None
        }
    }

    fn carrier_norm(&self) -> f64 {
        self.mats[0].norm_fro()
    }

    /// Deflate negligible subdiagonals of the carrier in [0, hi].
    fn deflate(&mut self, hi: usize) {
        let eps = f64::EPSILON;
        let hnorm = self.carrier_norm();
        for i in 1..=hi {
            let sub = self.mats[0][(i, i - 1)];
            if sub == S::ZERO {
                continue;
            }
            let mut thresh =
                eps * (self.mats[0][(i - 1, i - 1)].abs() + self.mats[0][(i, i)].abs());
            if thresh == 0.0 {
                thresh = eps * hnorm;
            }
            if sub.abs() <= thresh {
                self.mats[0][(i, i - 1)] = S::ZERO;
            }
        }
    }

    /// Resolve a converged 2×2 carrier window: split it into 1×1 blocks, or
    /// (real field, complex pair) keep it. Returns true if the window is
    /// finished.
    fn finish_two_by_two(&mut self, lo: usize) -> bool {
        let hi = lo + 1;
        let p2 = match self.product_block(lo, 2) {
            Some(m) => m,
            None => return false,
        };
        let tr = p2[(0, 0)] + p2[(1, 1)];
        let det = p2[(0, 0)] * p2[(1, 1)] - p2[(0, 1)] * p2[(1, 0)];
        if S::FIELD == Field::Real {
            let disc = tr.re() * tr.re() - 4.0 * det.re();
            if disc < 0.0 {
                // Complex-conjugate pair; the block stays.
                return true;
            }
        }
        // Split: rotate an eigenvector of the window product into e1.
        let sq = (tr * tr - det.scale(4.0)).sqrt();
        let l1 = (tr + sq).scale(0.5);
        let l2 = (tr - sq).scale(0.5);
        let lambda = if l1.abs() >= l2.abs() { l1 } else { l2 };
        // Eigenvector from the better-scaled row of (P − λI).
        let c1 = (p2[(0, 1)], lambda - p2[(0, 0)]);
        let c2 = (lambda - p2[(1, 1)], p2[(1, 0)]);
        let (x0, x1) = if c1.0.abs_sq() + c1.1.abs_sq() >= c2.0.abs_sq() + c2.1.abs_sq() {
            c1
        } else {
            c2
        };
        let norm = (x0.abs_sq() + x1.abs_sq()).sqrt();
        if norm == 0.0 {
            return false;
        }
        // First column ∝ (x0, x1).
        let g = Matrix::from_rows(&[
            vec![x0.scale(1.0 / norm), -x1.conj().scale(1.0 / norm)],
            vec![x1.scale(1.0 / norm), x0.conj().scale(1.0 / norm)],
        ]);
        self.apply_at(0, lo, &g);
        if self.p > 1 {
            self.chase_col_to_row(lo, 2);
        }
        let sub = self.mats[0][(hi, lo)];
        let scale = self.mats[0][(lo, lo)].abs() + self.mats[0][(hi, hi)].abs();
        let thresh = (f64::EPSILON * scale).max(f64::EPSILON * self.carrier_norm()) * 64.0;
        if sub.abs() <= thresh {
            self.mats[0][(hi, lo)] = S::ZERO;
            true
        } else {
            false
        }
    }

    /// Shift block: trailing 2×2 of the window product, or the exceptional
    /// variant when the window has stalled.
    fn shift_block(&self, hi: usize, exceptional: bool) -> Option<Matrix<S>> {
        let mut t2 = self.product_block(hi - 1, 2)?;
        if exceptional {
            let s = t2[(1, 0)].abs() + t2[(0, 1)].abs();
            let t22 = t2[(1, 1)];
            t2 = Matrix::from_rows(&[
                vec![S::from_f64(0.75 * s) + t22, S::from_f64(-0.4375 * s)],
                vec![S::from_f64(s), t22],
            ]);
        }
        Some(t2)
    }

    /// First column of the shift polynomial applied to the window product.
    /// Real field: (P − μ₁)(P − μ₂)e₁ (three components, real data);
    /// complex field: (P − μ)e₁ (two components).
    fn first_column(&self, lo: usize, hi: usize, exceptional: bool) -> Option<Vec<S>> {
        let t2 = self.shift_block(hi, exceptional)?;
        let tr = t2[(0, 0)] + t2[(1, 1)];
        let det = t2[(0, 0)] * t2[(1, 1)] - t2[(0, 1)] * t2[(1, 0)];
        match S::FIELD {
            Field::Real => {
                let k = 3.min(hi - lo + 1);
                debug_assert!(k == 3);
                let p3 = self.product_block_window(lo, k)?;
                // v = P(P e1) − tr·P e1 + det·e1, first three components.
                let pe1: Vec<S> = (0..k).map(|i| p3[(i, 0)]).collect();
                let mut v = vec![S::ZERO; k];
                for i in 0..k {
                    let mut acc = S::ZERO;
                    for j in 0..k {
                        acc = acc + p3[(i, j)] * pe1[j];
                    }
                    v[i] = acc - tr * pe1[i];
                }
                v[0] = v[0] + det;
                Some(v)
            }
            Field::Complex => {
                // Wilkinson shift: eigenvalue of t2 closest to its (1,1) entry.
                let sq = (tr * tr - det.scale(4.0)).sqrt();
                let l1 = (tr + sq).scale(0.5);
                let l2 = (tr - sq).scale(0.5);
                let target = t2[(1, 1)];
                let mu = if (l1 - target).abs() <= (l2 - target).abs() { l1 } else { l2 };
                let p2 = self.product_block_window(lo, 2)?;
                Some(vec![p2[(0, 0)] - mu, p2[(1, 0)]])
            }
        }
    }

    /// Leading k×k block of the window product starting at `lo`. The carrier
    /// contributes its Hessenberg block; window boundaries guarantee the
    /// block product is the true leading block of the window product.
    fn product_block_window(&self, lo: usize, k: usize) -> Option<Matrix<S>> {
        self.product_block(lo, k)
    }

    /// One implicitly shifted sweep on the window [lo, hi].
    fn sweep(&mut self, lo: usize, hi: usize, exceptional: bool) {
        let bulge = match S::FIELD {
            Field::Real => 3usize,
            Field::Complex => 2usize,
        };
        let v = match self.first_column(lo, hi, exceptional) {
            Some(v) => v,
            None => {
                // Chain block was numerically singular: fall back to a
                // carrier-only shift which is always computable.
                let h = &self.mats[0];
                let mut v = vec![S::ZERO; bulge];
                v[0] = h[(lo, lo)] - h[(hi, hi)];
                v[1] = h[(lo + 1, lo)];
                if bulge == 3 {
                    v[2] = S::ZERO;
                }
                v
            }
        };
        let wr = self.row_vertex(0);
        // Initial transform at vertex 0 with first column ∝ v.
        let z = unitary_with_first_column(&v);
        self.apply_at(0, lo, &z);
        if self.p > 1 {
            self.chase_col_to_row(lo, v.len());
        }
        // Chase the bulge down the carrier.
        let mut b = lo;
        loop {
            // Column b holds fill in rows b+1..=min(b+bulge, hi).
            let last = (b + bulge).min(hi);
            let k = last - b;
            if k <= 1 {
                break;
            }
            let col: Vec<S> = (0..k).map(|i| self.mats[0][(b + 1 + i, b)]).collect();
            let w = unitary_zeroing_tail(&col);
            self.apply_at(wr, b + 1, &w);
            for i in 1..k {
                self.mats[0][(b + 1 + i, b)] = S::ZERO;
            }
            if self.p > 1 {
                self.chase_row_to_col(b + 1, k);
            }
            b += 1;
            if b >= hi - 1 {
                // Remaining fill is within the Hessenberg profile.
                break;
            }
        }
        // Clear rounding-level fill below the first subdiagonal.
        for j in lo..hi.saturating_sub(1) {
            for i in j + 2..=hi {
                let x = self.mats[0][(i, j)];
                if x != S::ZERO && x.abs() <= f64::EPSILON * 16.0 * self.carrier_norm() {
                    self.mats[0][(i, j)] = S::ZERO;
                }
            }
        }
    }

    /// Phase 3: shifted iteration with deflation.
    pub fn iterate(&mut self, opts: &IterOpts) -> Result<(), LinalgError<S>> {
        let n = self.n;
        let max_sweeps = opts.max_sweeps.unwrap_or(30 * n.max(1));
        let mut total = 0usize;
        let mut hi = n as i64 - 1;
        let mut stall = 0usize;
        let mut split_attempts = 0usize;
        while hi > 0 {
            let h = hi as usize;
            self.deflate(h);
            if self.mats[0][(h, h - 1)] == S::ZERO {
                hi -= 1;
                stall = 0;
                split_attempts = 0;
                continue;
            }
            // Active window [lo, h].
            let mut lo = h - 1;
            while lo > 0 && self.mats[0][(lo, lo - 1)] != S::ZERO {
                lo -= 1;
            }
            if h - lo == 1 {
                split_attempts += 1;
                if self.finish_two_by_two(lo) {
                    hi = lo as i64 - 1;
                    stall = 0;
                    split_attempts = 0;
                    continue;
                }
                if split_attempts >= MAX_SPLIT_ATTEMPTS {
                    return Err(self.iteration_limit(total, (lo, h)));
                }
                continue;
            }
            if total >= max_sweeps {
                return Err(self.iteration_limit(total, (lo, h)));
            }
            let exceptional = stall > 0 && stall % EXCEPTIONAL_EVERY == 0;
            self.sweep(lo, h, exceptional);
            total += 1;
            stall += 1;
        }
        // A leading 1×1 (hi == 0) is final by construction.
        Ok(())
    }

    fn iteration_limit(&self, sweeps: usize, window: (usize, usize)) -> LinalgError<S> {
        LinalgError::IterationLimit {
            context: format!("periodic QZ on a cycle of length {}", self.p),
            partial: Box::new(PartialReduction {
                factors: self.q.clone(),
                reduced: self.mats.clone(),
                sweeps,
                window,
            }),
        }
    }

    pub fn into_parts(self) -> (Vec<Matrix<S>>, Vec<Matrix<S>>) {
        (self.q, self.mats)
    }
}

/// Inverse of an upper-triangular matrix by back substitution; `None` when a
/// diagonal entry is exactly zero or the result overflows.
fn tri_inverse<S: Scalar>(t: &Matrix<S>) -> Option<Matrix<S>> {
    let n = t.rows();
    for i in 0..n {
        if t[(i, i)] == S::ZERO {
            return None;
        }
    }
    let mut inv = Matrix::<S>::zeros(n, n);
    for j in (0..n).rev() {
        inv[(j, j)] = S::ONE / t[(j, j)];
        for i in (0..j).rev() {
            let mut acc = S::ZERO;
            for k in i + 1..=j {
                acc = acc + t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc / t[(i, i)];
        }
    }
    if inv.all_finite() {
        Some(inv)
    } else {
        None
    }
}

/// 2×2 unitary g with gᴴ (a, b)ᵀ = (r, 0)ᵀ.
fn givens_col<S: Scalar>(a: S, b: S) -> Matrix<S> {
    let norm = (a.abs_sq() + b.abs_sq()).sqrt();
    if norm == 0.0 || b == S::ZERO {
        return Matrix::identity(2);
    }
    let c = a.scale(1.0 / norm);
    let s = b.scale(1.0 / norm);
    // First column (c, s): gᴴ maps (a, b) ∝ first column to (norm, 0).
    Matrix::from_rows(&[vec![c, -s.conj()], vec![s, c.conj()]])
}

/// k×k unitary whose first column is parallel to `v`.
fn unitary_with_first_column<S: Scalar>(v: &[S]) -> Matrix<S> {
    let k = v.len();
    let norm = v.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Matrix::identity(k);
    }
    // Householder H with H v = βe₁ gives Hᴴ e₁ = v/β; use Z = Hᴴ.
    let hm = householder_block(v);
    hm.adjoint()
}

/// k×k unitary u with uᴴ x = (r, 0, …, 0)ᵀ, i.e. left-applying uᴴ zeroes the
/// tail of x.
pub(crate) fn unitary_zeroing_tail<S: Scalar>(x: &[S]) -> Matrix<S> {
    // uᴴ x = βe₁ ⟺ u = Hᴴ with H x = βe₁.
    householder_block(x).adjoint()
}

/// Explicit Householder block H = I − τ u uᴴ with H x = βe₁ (β real).
fn householder_block<S: Scalar>(x: &[S]) -> Matrix<S> {
    let k = x.len();
    let tail_sq: f64 = x[1..].iter().map(|e| e.abs_sq()).sum();
    let alpha = x[0];
    if tail_sq == 0.0 {
        // Only a phase remains; H = diag(phasē, 1, …) maps x to |x| e₁.
        let mut m = Matrix::<S>::identity(k);
        m[(0, 0)] = alpha.unit_phase().conj();
        return m;
    }
    let norm = (alpha.abs_sq() + tail_sq).sqrt();
    let beta = S::from_f64(if alpha.re() >= 0.0 { -norm } else { norm });
    let denom = alpha - beta;
    let mut u = vec![S::ONE; k];
    for (ui, xi) in u[1..].iter_mut().zip(&x[1..]) {
        *ui = *xi / denom;
    }
    let tau = (beta - alpha.conj()) / beta;
    let mut m = Matrix::<S>::identity(k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = m[(i, j)] - tau * u[i] * u[j].conj();
        }
    }
    m
}

/// Run the full three-phase reduction. `signs[0]` must be `Forward`.
pub(crate) fn reduce<S: Scalar>(
    mats: Vec<Matrix<S>>,
    signs: Vec<Sign>,
    opts: &IterOpts,
) -> Result<(Vec<Matrix<S>>, Vec<Matrix<S>>), LinalgError<S>> {
    let mut st = CycleState::new(mats, signs);
    st.chain_triangularize();
    st.hessenberg_carrier();
    st.iterate(opts)?;
    Ok(st.into_parts())
}
