//! Scalar abstraction for the numeric layer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the propagation, airtime and geometry math is
/// written against. Implemented for `f32` and `f64`; the event engine
/// pins `f64`.
pub trait Scalar: Float + FromPrimitive + Sum + Debug + Display + Default + 'static {
    /// Converts an `f64` literal. Panics only on values a float cannot
    /// represent at all, which no constant in this crate triggers.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("representable literal")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
