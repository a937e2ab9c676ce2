//! Scalar abstraction shared by the generic numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type usable by the generic numerics: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Threshold outside which scaled recurrences renormalize their mantissa.
    const RESCALE: f64;
}

impl Real for f32 {
    const RESCALE: f64 = 1e30;
}

impl Real for f64 {
    const RESCALE: f64 = 1e100;
}

/// Lossless-enough conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target scalar")
}

/// Conversion of a count or index into `T`.
#[inline]
pub fn from_usize<T: Real>(k: usize) -> T {
    T::from_usize(k).expect("integer representable in target scalar")
}
