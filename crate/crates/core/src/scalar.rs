//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point type the toolkit computes in: `f32` or `f64`.
///
/// Tolerances quoted throughout the crate assume `f64`; `f32` works for the
/// same code paths with proportionally looser accuracy.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Sum + Default + Display + LowerExp + Debug
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `ln(e^a + e^b)` without overflow.
    #[inline]
    fn log_add_exp(a: Self, b: Self) -> Self {
        if a == Self::neg_infinity() {
            return b;
        }
        if b == Self::neg_infinity() {
            return a;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + FftNum
        + Sum
        + Default
        + Display
        + LowerExp
        + Debug
{
}
