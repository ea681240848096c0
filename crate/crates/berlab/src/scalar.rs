//! Real scalar abstraction for the numeric core.
//!
//! Everything in the library is generic over a real floating-point type and
//! works on `num_complex::Complex<F>` entries built from it. `f64` is the
//! precision the documented tolerances are calibrated for; `f32` compiles and
//! behaves sensibly on well-conditioned inputs but cannot honour thresholds
//! tighter than its epsilon. Concrete aliases live at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar the library is generic over.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts a literal constant (tolerance, grid width) into `Self`.
    ///
    /// Panics only if the constant is not representable, which cannot happen
    /// for the finite literals used throughout this crate.
    fn konst(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant fits every supported scalar")
    }

    /// Lossy view as `f64`, used when reporting values.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar is representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
