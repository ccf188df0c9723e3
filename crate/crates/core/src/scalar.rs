//! Scalar abstraction shared by every solver in the crate.
//!
//! All numerical code is written against [`Real`], which is implemented for
//! `f32` and `f64`. The tolerances used throughout the crate (Newton residuals
//! of `1e-10`, Hamiltonian residuals of `1e-12`) only make sense in double
//! precision; `f32` is supported for quick exploratory runs.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used by the solvers: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Largest magnitude of an exponent passed to `exp` by [`clamped_exp`].
    const EXP_LIMIT: f64;

    /// Converts an `f64` literal. Panics only if the value is not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EXP_LIMIT: f64 = 85.0;
}

impl Real for f64 {
    const EXP_LIMIT: f64 = 700.0;
}

/// `exp(z)` with `z` clamped to `±T::EXP_LIMIT`. NaN is propagated.
#[inline]
pub fn clamped_exp<T: Real>(z: T) -> T {
    if z.is_nan() {
        return z;
    }
    let lim = T::lit(T::EXP_LIMIT);
    z.max(-lim).min(lim).exp()
}

/// Maximum absolute value of a slice (0 for an empty slice).
pub fn max_abs<T: Real>(values: &[T]) -> T {
    values
        .iter()
        .fold(T::zero(), |acc, &x| if x.abs() > acc || x.is_nan() { x.abs() } else { acc })
}
