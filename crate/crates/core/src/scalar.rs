//! Scalar abstraction: every numerical routine is generic over the float type.

use num_traits::float::{Float, FloatConst};
use num_traits::FromPrimitive;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating scalar for chart, field and map computations: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy view as `f64` (exact for `f64`, widened for `f32`).
    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar representable as f64")
    }

    /// Full circle constant `2*pi`.
    #[inline]
    fn two_pi() -> Self {
        Self::PI() + Self::PI()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Reduce an angle to `[0, 2*pi)`.
#[inline]
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let y = x - (x / tau).floor() * tau;
    // floor rounding can land exactly on tau
    if y >= tau {
        y - tau
    } else if y < T::zero() {
        y + tau
    } else {
        y
    }
}

/// Reduce an angle difference to `(-pi, pi]`.
#[inline]
pub fn wrap_signed<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let mut y = x - (x / tau).round() * tau;
    if y <= -T::PI() {
        y += tau;
    } else if y > T::PI() {
        y -= tau;
    }
    y
}

/// Circular distance between two angles (result in `[0, pi]`).
#[inline]
pub fn circular_dist<T: Real>(a: T, b: T) -> T {
    wrap_signed(a - b).abs()
}
