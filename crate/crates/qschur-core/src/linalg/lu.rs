//! Partially pivoted LU, used by the embedding oracle and for condition
//! estimates. Independent of the Schur kernels.

use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LuFactors<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
    singular: bool,
}

pub fn lu_decompose<S: Scalar>(a: &Matrix<S>) -> LuFactors<S> {
    assert!(a.is_square());
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;
    let scale = a.norm_fro().max(1.0);
    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best <= f64::EPSILON * scale * n as f64 {
            singular = true;
            continue;
        }
        if pivot != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            perm.swap(k, pivot);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            for j in k + 1..n {
                lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
            }
        }
    }
    LuFactors { lu, perm, singular }
}

impl<S: Scalar> LuFactors<S> {
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solve A X = B for X.
    pub fn solve(&self, b: &Matrix<S>) -> Matrix<S> {
        assert!(!self.singular, "singular system");
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let mut x = Matrix::<S>::zeros(n, b.cols());
        for i in 0..n {
            for j in 0..b.cols() {
                x[(i, j)] = b[(self.perm[i], j)];
            }
        }
        // forward: L y = P b
        for k in 0..n {
            for i in k + 1..n {
                let f = self.lu[(i, k)];
                if f == S::ZERO {
                    continue;
                }
                for j in 0..b.cols() {
                    x[(i, j)] = x[(i, j)] - f * x[(k, j)];
                }
            }
        }
        // backward: U x = y
        for k in (0..n).rev() {
            let d = self.lu[(k, k)];
            for j in 0..b.cols() {
                x[(k, j)] = x[(k, j)] / d;
            }
            for i in 0..k {
                let f = self.lu[(i, k)];
                if f == S::ZERO {
                    continue;
                }
                for j in 0..b.cols() {
                    x[(i, j)] = x[(i, j)] - f * x[(k, j)];
                }
            }
        }
        x
    }
}

/// ‖A‖_F · ‖A⁻¹‖_F, or +∞ for (numerically) singular input.
pub fn condition_estimate<S: Scalar>(a: &Matrix<S>) -> f64 {
    if a.rows() == 0 {
        return 1.0;
    }
    let f = lu_decompose(a);
    if f.is_singular() {
        return f64::INFINITY;
    }
    let inv = f.solve(&Matrix::identity(a.rows()));
    a.norm_fro() * inv.norm_fro()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = Matrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]);
        let b = Matrix::from_rows(&[vec![2.0], vec![7.0]]);
        let x = lu_decompose(&a).solve(&b);
        assert!((x[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((x[(1, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flags_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(lu_decompose(&a).is_singular());
        assert!(condition_estimate(&a).is_infinite());
    }
}
