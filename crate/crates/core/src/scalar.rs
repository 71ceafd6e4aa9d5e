//! Scalar abstraction shared by every numeric module in the crate.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the dynamics and controllers are generic over.
///
/// Implemented for `f32` and `f64`. Everything outside the core math
/// (telemetry, scenarios, the teleop bridge) works in `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into this scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamps `v` to `[lo, hi]`. NaN passes through unchanged.
pub fn clamp<S: Real>(v: S, lo: S, hi: S) -> S {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}
