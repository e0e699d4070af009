//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything numeric in the crate is generic over this trait. The two
/// tolerance hooks let rank decisions scale with the precision of the type.
pub trait Real:
    RealField + Copy + Default + Debug + Display + LowerExp + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Machine epsilon.
    fn eps() -> Self;

    /// Default relative cutoff for numerical rank decisions.
    fn default_rank_rtol() -> Self;

    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite scalar")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    #[inline]
    fn magnitude(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    #[inline]
    fn finite(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }

    fn default_rank_rtol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }

    // 1e-10 is below single-precision resolution.
    fn default_rank_rtol() -> Self {
        1e-5
    }
}
