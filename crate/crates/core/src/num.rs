use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for the closed-form bounds, the statistics layer and the
/// dense solver. The shipped tools instantiate everything at `f64` (see the
/// aliases at the crate root); `f32` is supported but carries its own,
/// coarser accuracy.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Panics if the value is not representable,
    /// which none of the constants used in this crate are able to trigger.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    fn from_count(c: usize) -> Self {
        Self::from_usize(c).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
