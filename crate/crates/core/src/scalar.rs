//! Real scalar abstraction.
//!
//! Every numerical routine in this crate is generic over the floating-point
//! type through [`Real`]. The bound set is the union of what the linear
//! algebra layer (`nalgebra`) and the plain numerics need; `f32` and `f64`
//! are the intended instantiations and concrete `f64` aliases live at the
//! crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar used throughout the crate.
pub trait Real:
    RealField
    + Copy
    + Default
    + FromPrimitive
    + ToPrimitive
    + Serialize
    + DeserializeOwned
    + std::iter::Sum
    + 'static
{
    /// Convert an `f64` constant into this scalar type.
    ///
    /// Panics if the value is not representable, which cannot happen for
    /// finite literals and the `f32`/`f64` instantiations used here.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Conversion back to `f64`; exact for `f64`, widening for `f32`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Complex<R> = num_complex::Complex<R>;

/// `i^k` for `k` taken modulo 4.
#[inline]
pub fn i_pow<R: Real>(k: u8) -> Complex<R> {
    match k & 3 {
        0 => Complex::new(R::one(), R::zero()),
        1 => Complex::new(R::zero(), R::one()),
        2 => Complex::new(-R::one(), R::zero()),
        _ => Complex::new(R::zero(), -R::one()),
    }
}
