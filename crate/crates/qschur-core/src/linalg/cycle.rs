//! Reduction of a signed cycle of (possibly rectangular) matrices.
//!
//! Rectangular cycle matrices are compressed to a square core problem by one
//! QR/RQ sweep around the cycle: every edge aligned with the traversal ends
//! in QR-form (zeros below the main diagonal), every opposing square edge in
//! upper-triangular form, and the remaining freedom concentrates in a d×d
//! core at the top-left of each matrix, d being the smallest vertex
//! dimension on the cycle. The core problem is handed to the periodic QZ,
//! leftover quotient blocks are triangularized by one further sweep, and the
//! assembled matrices land exactly in the trapezoidal shapes.
//!
//! Rectangular matrices on edges that oppose the traversal are rejected:
//! their reduction needs Kronecker-like staircase machinery for structurally
//! singular pencils, which is outside this crate's scope.

use crate::error::LinalgError;
use crate::linalg::householder::{qr, rq};
use crate::linalg::periodic::{periodic_schur, Signature};
use crate::linalg::pqz::IterOpts;
use crate::matrix::Matrix;
use crate::quiver::Sign;
use crate::scalar::{Field, Scalar};

/// Result of the compression stage: square cores plus the partially reduced
/// full matrices (trapezoidal paddings in place). Indices follow the input
/// traversal order.
#[derive(Debug, Clone)]
pub struct CycleCompression<S> {
    pub cores: Vec<Matrix<S>>,
    pub vertex_factors: Vec<Matrix<S>>,
    pub padded: Vec<Matrix<S>>,
    pub core_dim: usize,
    /// Input index of the designated quasi-block carrier edge.
    pub carrier: usize,
}

/// Fully reduced cycle: per-vertex unitaries and final full-size matrices.
#[derive(Debug, Clone)]
pub struct CycleReduction<S> {
    pub vertex_q: Vec<Matrix<S>>,
    pub reduced: Vec<Matrix<S>>,
    pub core_dim: usize,
    pub carrier: usize,
}

/// Internal mutable state over the rotated labels (carrier first).
struct RectState<S: Scalar> {
    p: usize,
    mats: Vec<Matrix<S>>,
    signs: Vec<Sign>,
    dims: Vec<usize>,
    q: Vec<Matrix<S>>,
}

impl<S: Scalar> RectState<S> {
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

    /// Basis change at vertex `w` by `u` acting on coordinates [pos, pos+k).
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

    /// One sweep along edges 1..p−1, fixing one new vertex per edge and
    /// leaving each matrix in its QR-/RQ-form.
    fn chain(&mut self) {
        for e in 1..self.p {
            match self.signs[e] {
                Sign::Forward => {
                    let f = qr(&self.mats[e]);
                    self.apply_at((e + 1) % self.p, 0, &f.q);
                    self.mats[e] = f.r;
                }
                Sign::Inverse => {
                    let f = rq(&self.mats[e]);
                    self.apply_at((e + 1) % self.p, 0, &f.q);
                    self.mats[e] = f.r;
                }
            }
        }
    }

    /// Triangularize the dead (beyond-core) blocks with one sweep along the
    /// quotient path. Vertex 1 has no dead part (the carrier enters a
    /// minimal vertex), so the path runs through vertices 2, …, p−1, 0 and
    /// consists of edges 2..=p−1; edge 1 and the carrier have empty quotient
    /// blocks by construction.
    fn quotient_sweep(&mut self, d: usize) {
        for e in 2..self.p {
            self.quotient_step(e, d);
        }
    }

    fn quotient_step(&mut self, e: usize, d: usize) {
        let (rv, cv) = (self.row_vertex(e), self.col_vertex(e));
        let (rdead, cdead) = (self.dims[rv] - d, self.dims[cv] - d);
        if rdead == 0 || cdead == 0 {
            return;
        }
        let rows = self.mats[e].rows();
        let cols = self.mats[e].cols();
        let block = self.mats[e].block(d, rows, d, cols);
        match self.signs[e] {
            Sign::Forward => {
                let f = qr(&block);
                self.apply_at((e + 1) % self.p, d, &f.q);
                self.mats[e].set_block(d, d, &f.r);
            }
            Sign::Inverse => {
                let f = rq(&block);
                self.apply_at((e + 1) % self.p, d, &f.q);
                self.mats[e].set_block(d, d, &f.r);
            }
        }
    }
}

/// Infer per-vertex dimensions from the matrices and signs; errors on an
/// inconsistent chain.
fn infer_dims<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &[Sign],
) -> Result<Vec<usize>, LinalgError<S>> {
    let p = mats.len();
    let mut dims = vec![0usize; p];
    for t in 0..p {
        let (at_t, at_next) = match signs[t] {
            Sign::Forward => (mats[t].cols(), mats[t].rows()),
            Sign::Inverse => (mats[t].rows(), mats[t].cols()),
        };
        for (w, dim) in [(t, at_t), ((t + 1) % p, at_next)] {
            if dims[w] == 0 {
                dims[w] = dim;
            } else if dims[w] != dim {
                return Err(LinalgError::DimensionMismatch(format!(
                    "cycle vertex {w}: edges disagree on its dimension ({} vs {dim})",
                    dims[w]
                )));
            }
        }
    }
    Ok(dims)
}

/// Compression stage: one chain sweep around the cycle, producing the d×d
/// cores and the trapezoidal paddings.
pub fn rectangular_cycle_compress<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &Signature,
) -> Result<CycleCompression<S>, LinalgError<S>> {
    let (st, off) = compress_state(mats, signs)?;
    let d = *st.dims.iter().min().unwrap();
    let cores = (0..st.p).map(|e| st.mats[e].block(0, d, 0, d)).collect();
    let (mats_in, q_in, cores_in) = unrotate(st.p, off, st.mats.clone(), st.q.clone(), cores);
    Ok(CycleCompression {
        cores: cores_in,
        vertex_factors: q_in,
        padded: mats_in,
        core_dim: d,
        carrier: off,
    })
}

fn carrier_offset(dims_input_order: &[usize], d: usize) -> usize {
    let p = dims_input_order.len();
    (0..p)
        .find(|&t| dims_input_order[(t + 1) % p] == d)
        .expect("some vertex attains the minimal dimension")
}

fn rotate<T: Clone>(v: &[T], off: usize) -> Vec<T> {
    let p = v.len();
    (0..p).map(|j| v[(off + j) % p].clone()).collect()
}

fn unrotate<S: Scalar>(
    p: usize,
    off: usize,
    mats: Vec<Matrix<S>>,
    q: Vec<Matrix<S>>,
    cores: Vec<Matrix<S>>,
) -> (Vec<Matrix<S>>, Vec<Matrix<S>>, Vec<Matrix<S>>) {
    let mut mo = vec![Matrix::zeros(0, 0); p];
    let mut qo = vec![Matrix::zeros(0, 0); p];
    let mut co = vec![Matrix::zeros(0, 0); p];
    for j in 0..p {
        let orig = (off + j) % p;
        mo[orig] = mats[j].clone();
        qo[orig] = q[j].clone();
        co[orig] = cores[j].clone();
    }
    (mo, qo, co)
}

/// Validate, rotate labels so the carrier is edge 0, and run the chain.
/// Returns the rotated state together with the rotation offset (the input
/// index of the carrier).
fn compress_state<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &Signature,
) -> Result<(RectState<S>, usize), LinalgError<S>> {
    let p = mats.len();
    if p == 0 || signs.len() != p {
        return Err(LinalgError::Contract("cycle and signature sizes differ or are empty".into()));
    }
    for m in mats {
        if !m.all_finite() {
            return Err(LinalgError::Contract("cycle matrix has non-finite entries".into()));
        }
    }
    for (m, s) in mats.iter().zip(&signs.signs) {
        if *s == Sign::Inverse && !m.is_square() {
            return Err(LinalgError::UnsupportedCycleStructure);
        }
    }
    let dims = infer_dims(mats, &signs.signs)?;
    let d = *dims.iter().min().unwrap();
    let off = carrier_offset(&dims, d);
    let rdims = rotate(&dims, off);
    let mut st = RectState {
        p,
        mats: rotate(mats, off),
        signs: rotate(&signs.signs, off),
        q: rdims.iter().map(|&r| Matrix::identity(r)).collect(),
        dims: rdims,
    };
    st.chain();
    Ok((st, off))
}

/// Full reduction: compression, core periodic QZ, quotient sweep, assembly.
/// `struct_tol(edge)` gives the per-edge absolute threshold below which
/// declared-zero entries are flushed; anything larger in a declared-zero
/// position is a structure failure.
pub fn reduce_cycle<S: Scalar>(
    mats: &[Matrix<S>],
    signs: &Signature,
    opts: &IterOpts,
    struct_tol: impl Fn(usize) -> f64,
) -> Result<CycleReduction<S>, LinalgError<S>> {
    let (mut st, off) = compress_state(mats, signs)?;
    let p = st.p;
    let d = *st.dims.iter().min().unwrap();

    // Core periodic Schur on the d×d blocks.
    let cores: Vec<Matrix<S>> = (0..p).map(|e| st.mats[e].block(0, d, 0, d)).collect();
    let core_signs = Signature::new(st.signs.clone());
    let pf = periodic_schur(&cores, &core_signs, opts)?;
    for w in 0..p {
        st.apply_at(w, 0, &pf.q[w]);
    }
    for e in 0..p {
        st.mats[e].set_block(0, 0, &pf.t[e]);
    }

    // Quotient blocks.
    st.quotient_sweep(d);

    // Flush and check the declared zero regions. The carrier may keep 2×2
    // core blocks over the reals; everything else is exact-pattern.
    for e in 0..p {
        let rows = st.mats[e].rows();
        let cols = st.mats[e].cols();
        let tol = struct_tol((off + e) % p);
        for i in 0..rows {
            for j in 0..cols {
                let zero_here = match st.signs[e] {
                    Sign::Forward => i > j,
                    Sign::Inverse => (i as isize - j as isize) > rows as isize - cols as isize,
                };
                if !zero_here {
                    continue;
                }
                let exempt = e == 0
                    && S::FIELD == Field::Real
                    && i == j + 1
                    && i < d
                    && st.mats[0][(i, j)] != S::ZERO;
                if exempt {
                    continue;
                }
                let v = st.mats[e][(i, j)];
                if v == S::ZERO {
                    continue;
                }
                if v.abs() <= tol {
                    st.mats[e][(i, j)] = S::ZERO;
                } else {
                    return Err(LinalgError::StructureFailure {
                        edge: (off + e) % p,
                        row: i,
                        col: j,
                        magnitude: v.abs(),
                    });
                }
            }
        }
    }

    let cores_dummy = vec![Matrix::<S>::zeros(0, 0); p];
    let (reduced, vertex_q, _) = unrotate(p, off, st.mats, st.q, cores_dummy);
    Ok(CycleReduction { vertex_q, reduced, core_dim: d, carrier: off })
}
