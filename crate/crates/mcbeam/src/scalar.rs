//! Scalar abstraction: everything is generic over the real field so the same
//! solvers run in `f64` (default) or `f32`.

use num_traits::{Float, FromPrimitive, NumAssignOps};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar type underlying all vectors, beamformers, and objectives.
///
/// The bound set is the intersection of what the numerical kernels need:
/// floating-point arithmetic, conversion from literals, compound assignment,
/// summation, and thread-safety for the parallel paths.
pub trait Scalar:
    Float + FromPrimitive + NumAssignOps + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion of an `f64` constant (tolerances,
    /// dB exponents). Panics only if the target type cannot represent any
    /// finite approximation, which cannot happen for f32/f64.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Lossy conversion from a usize count (dimensions, iteration numbers).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssignOps + Sum<T> + Debug + Display + Send + Sync + 'static
{
}
