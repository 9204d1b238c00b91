//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the estimators are generic over.
///
/// Implemented for `f32` and `f64`. The two numerical limits used by the
/// crate are per-type, since a single absolute threshold cannot serve both
/// precisions.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Magnitude above which a recursion or simulation is reported as overflowing.
    fn overflow_limit() -> Self;

    /// Condition number of a normal matrix above which a design is declared singular.
    fn singular_cond_limit() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn finite(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f64 {
    fn overflow_limit() -> Self {
        1e300
    }

    fn singular_cond_limit() -> Self {
        1e12
    }
}

impl Real for f32 {
    fn overflow_limit() -> Self {
        1e36
    }

    fn singular_cond_limit() -> Self {
        1e6
    }
}
