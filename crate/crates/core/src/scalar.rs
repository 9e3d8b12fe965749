use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the embedding and ranking math is written against.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; every `Scalar` can represent the value
    /// up to rounding.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable by every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + FromStr + Send + Sync + 'static
{
}
