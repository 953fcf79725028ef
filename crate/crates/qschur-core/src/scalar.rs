//! Scalar abstraction over the two supported fields: `f64` and `Complex64`.
//!
//! Every kernel in this crate is generic over [`Scalar`] so the real and
//! complex pipelines share one implementation. The trait is deliberately
//! minimal: double-precision components only.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// The scalar field a matrix lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => write!(f, "real"),
            Field::Complex => write!(f, "complex"),
        }
    }
}

/// Double-precision scalar usable as a matrix entry.
pub trait Scalar:
    Copy
    + PartialEq
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const FIELD: Field;
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(x: f64) -> Self;
    /// Build from components; the real impl asserts im = 0 in debug builds.
    fn from_re_im(re: f64, im: f64) -> Self;
    /// Complex conjugate (identity for reals).
    fn conj(self) -> Self;
    /// Modulus |x|.
    fn abs(self) -> f64;
    /// |x|^2, cheaper than `abs` squared for complex values.
    fn abs_sq(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    /// Multiply by a real factor.
    fn scale(self, f: f64) -> Self;
    /// x / |x|, or one when x = 0. Used for sign conventions.
    fn unit_phase(self) -> Self;
    /// Principal square root (callers in the real path only pass x >= 0).
    fn sqrt(self) -> Self;
    fn to_c64(self) -> Complex64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn from_re_im(re: f64, im: f64) -> Self {
        debug_assert!(im == 0.0, "imaginary component in a real scalar");
        re
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn scale(self, f: f64) -> Self {
        self * f
    }
    #[inline]
    fn unit_phase(self) -> Self {
        if self == 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);

    #[inline]
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn from_re_im(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn abs(self) -> f64 {
        // hypot is robust against overflow in intermediate squares.
        self.re.hypot(self.im)
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn scale(self, f: f64) -> Self {
        Complex64::new(self.re * f, self.im * f)
    }
    #[inline]
    fn unit_phase(self) -> Self {
        let m = Scalar::abs(self);
        if m == 0.0 {
            Self::ONE
        } else {
            self.scale(1.0 / m)
        }
    }
    #[inline]
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        self
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_phase_conventions() {
        assert_eq!(Scalar::unit_phase(0.0_f64), 1.0);
        assert_eq!(Scalar::unit_phase(-3.0_f64), -1.0);
        let z = Complex64::new(0.0, -2.0);
        let p = Scalar::unit_phase(z);
        assert!((Scalar::abs(p) - 1.0).abs() < 1e-15);
        assert!((p - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(Scalar::unit_phase(Complex64::new(0.0, 0.0)), Complex64::ONE);
    }
}
