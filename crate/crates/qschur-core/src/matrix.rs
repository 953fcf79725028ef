//! Dense row-major matrices over a [`Scalar`] field.
//!
//! Sizes in this crate are desk scale (dimensions up to a few dozen), so the
//! kernels favour clarity and determinism over blocking or parallelism. All
//! operations are sequential and allocate fresh output.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn diag(entries: &[S]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose; plain transpose over the reals.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(S) -> T) -> Matrix<T> {
        Matrix::from_fn(self.rows, self.cols, |i, j| f(self[(i, j)]))
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        self.map(|x| x.to_c64())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch in matrix product"
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, f: f64) -> Self {
        self.map(|x| x.scale(f))
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Copy of the block `[r0, r1) x [c0, c1)`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r1 <= self.rows && c1 <= self.cols && r0 <= r1 && c0 <= c1);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// `‖Q^H Q − I‖_F`; zero for exactly unitary inputs.
    pub fn orthogonality_defect(&self) -> f64 {
        assert!(self.is_square());
        let gram = self.adjoint().mul(self);
        gram.sub(&Self::identity(self.rows)).norm_fro()
    }

    /// Left-multiply rows `[r0, r0+k)` by the k×k unitary block `uᴴ`.
    ///
    /// This is the row-side action of a change of basis `u` at the vertex the
    /// rows belong to: `A ← uᴴ A` restricted to those rows.
    pub fn apply_block_left(&mut self, r0: usize, u: &Matrix<S>) {
        let k = u.rows();
        assert!(u.is_square() && r0 + k <= self.rows);
        let mut col = vec![S::ZERO; k];
        for j in 0..self.cols {
            for i in 0..k {
                col[i] = self[(r0 + i, j)];
            }
            for i in 0..k {
                let mut acc = S::ZERO;
                for l in 0..k {
                    acc = acc + u[(l, i)].conj() * col[l];
                }
                self[(r0 + i, j)] = acc;
            }
        }
    }

    /// Right-multiply columns `[c0, c0+k)` by the k×k unitary block `u`.
    pub fn apply_block_right(&mut self, c0: usize, u: &Matrix<S>) {
        let k = u.rows();
        assert!(u.is_square() && c0 + k <= self.cols);
        let mut row = vec![S::ZERO; k];
        for i in 0..self.rows {
            for j in 0..k {
                row[j] = self[(i, c0 + j)];
            }
            for j in 0..k {
                let mut acc = S::ZERO;
                for l in 0..k {
                    acc = acc + row[l] * u[(l, j)];
                }
                self[(i, c0 + j)] = acc;
            }
        }
    }

    /// Flush entries with |x| <= threshold to exact zero, in place.
    pub fn flush_below(&mut self, threshold: f64) {
        for x in &mut self.data {
            if x.abs() <= threshold {
                *x = S::ZERO;
            }
        }
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_blocks() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let ab = a.mul(&b);
        assert_eq!(ab, Matrix::from_rows(&[vec![2.0, 1.0], vec![4.0, 3.0]]));
        assert_eq!(a.block(0, 2, 1, 2), Matrix::from_rows(&[vec![2.0], vec![4.0]]));
    }

    #[test]
    fn block_rotations_match_full_products() {
        let mut a = Matrix::from_fn(4, 3, |i, j| (3 * i + j) as f64);
        let u = Matrix::from_rows(&[vec![0.6, -0.8], vec![0.8, 0.6]]);
        let mut full = Matrix::<f64>::identity(4);
        full.set_block(1, 1, &u);
        let want = full.adjoint().mul(&a);
        a.apply_block_left(1, &u);
        assert!(a.sub(&want).norm_fro() < 1e-14);

        let mut b = Matrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let mut fullr = Matrix::<f64>::identity(4);
        fullr.set_block(2, 2, &u);
        let want = b.mul(&fullr);
        b.apply_block_right(2, &u);
        assert!(b.sub(&want).norm_fro() < 1e-14);
    }

    #[test]
    fn orthogonality_defect_scaled_identity() {
        let q = Matrix::<f64>::identity(5).scale(2.0);
        // ‖4I − I‖_F = 3√5
        assert!((q.orthogonality_defect() - 3.0 * 5.0_f64.sqrt()).abs() < 1e-12);
    }
}
