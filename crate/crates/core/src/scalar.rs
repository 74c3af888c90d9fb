use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the numeric kernels are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Distance kept from 0 and 1 when clipping uniforms.
    ///
    /// `1e-10` for `f64`; wider for narrower types so that `1 - eps != 1`.
    fn clip_eps() -> Self {
        let floor = Self::epsilon() * lit(64.0);
        lit::<Self>(1e-10).max(floor)
    }

    /// Absolute tolerance for iterative root finding on the unit interval.
    fn root_tol() -> Self {
        let floor = Self::epsilon() * lit(16.0);
        lit::<Self>(1e-14).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Clips a uniform into `[eps, 1 - eps]`.
#[inline]
pub(crate) fn clip_unit<T: Scalar>(u: T) -> T {
    let eps = T::clip_eps();
    if u.is_nan() {
        return u;
    }
    u.max(eps).min(T::one() - eps)
}
