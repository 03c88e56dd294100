//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point type usable for images, operators and solvers.
///
/// Implemented for `f32` and `f64`. Both `RealField` and `Signed` provide an
/// `abs`, so generic code calls [`Real::magnitude`] instead.
pub trait Real: RealField + FftNum + Copy + ToPrimitive + FromPrimitive + Display + Debug {
    /// Relative tolerance that iterative and direct solvers are held to.
    fn solver_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn magnitude(self) -> Self {
        <Self as nalgebra::ComplexField>::abs(self)
    }

    /// Machine epsilon.
    fn eps() -> Self;

    /// Smallest positive normal number.
    fn min_positive() -> Self;
}

impl Real for f64 {
    fn solver_tol() -> Self {
        1e-8
    }
    fn eps() -> Self {
        f64::EPSILON
    }
    fn min_positive() -> Self {
        f64::MIN_POSITIVE
    }
}

impl Real for f32 {
    fn solver_tol() -> Self {
        1e-4
    }
    fn eps() -> Self {
        f32::EPSILON
    }
    fn min_positive() -> Self {
        f32::MIN_POSITIVE
    }
}

/// Euclidean norm of a slice.
pub fn norm2<T: Real>(x: &[T]) -> T {
    // scaled accumulation keeps tiny and huge entries from under/overflowing
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.magnitude()));
    if scale == T::zero() {
        return T::zero();
    }
    let sum = x.iter().fold(T::zero(), |acc, v| {
        let r = *v / scale;
        acc + r * r
    });
    scale * sum.sqrt()
}

pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}
