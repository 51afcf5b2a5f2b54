//! Scalar abstraction: the numeric kernels are generic over [`Real`], with
//! `f32` and `f64` as the provided instances.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar the library is generic over.
///
/// Everything is expressed through `num_traits::Float` plus conversions from
/// primitive literals; tolerances are always scaled by `Self::epsilon()` so
/// the same code paths are meaningful for both precisions.
pub trait Real:
    Float
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Shorthand for lossy conversion of an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in every float type")
    }

    /// Shorthand for converting a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossy view as `f64`, for display and serialization boundaries.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn as_f64(self) -> f64 {
        self
    }
}
