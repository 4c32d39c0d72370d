//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the simulation and error estimators are generic over.
///
/// Implemented for `f32` and `f64`. The extra methods cover what
/// `num_traits::Float` lacks: the complementary error function and
/// lossless conversion of `f64` literals.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Number of significand bits, including the implicit leading bit.
    const MANTISSA_DIGITS: u32;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Converts an `f64` constant, rounding to nearest.
    fn lit(x: f64) -> Self;

    /// Converts a count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Widens to `f64` for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const MANTISSA_DIGITS: u32 = f64::MANTISSA_DIGITS;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

impl Scalar for f32 {
    const MANTISSA_DIGITS: u32 = f32::MANTISSA_DIGITS;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}
