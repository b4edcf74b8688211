//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Floating point scalar usable throughout the crate: `f32` or `f64`.
///
/// `Signed` is required by the FFT backend. It also defines `abs` and
/// `signum`, so generic code calls those as `Float::abs(x)`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Signed
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance appropriate for invariant checks at this precision.
    #[inline]
    fn check_tol(reference: f64) -> Self {
        let eps = Self::epsilon().to_f64_lossy();
        Self::lit(reference.max(64.0 * eps))
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn abs<T: Real>(x: T) -> T {
    Float::abs(x)
}
