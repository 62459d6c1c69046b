//! Scalar abstraction shared by the analytic kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the analytic layer is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest tolerance that still makes sense at this precision.
    #[inline]
    fn tol_floor() -> Self {
        Self::epsilon() * Self::lit(8.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Log-sum-exp of a slice; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().cloned().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let s: T = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
