//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for literals and serialized values.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest representable value above `self`.
    fn next_above(self) -> Self;

    /// Largest representable value below `self`.
    fn next_below(self) -> Self;
}

impl Scalar for f32 {
    fn next_above(self) -> Self {
        self.next_up()
    }

    fn next_below(self) -> Self {
        self.next_down()
    }
}

impl Scalar for f64 {
    fn next_above(self) -> Self {
        self.next_up()
    }

    fn next_below(self) -> Self {
        self.next_down()
    }
}
