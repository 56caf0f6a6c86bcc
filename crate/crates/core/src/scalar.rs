//! Scalar abstraction shared by the probability kernels and region code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable for every information measure in this crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Tolerance used when checking that probabilities sum to one.
    fn norm_tol() -> Self;

    /// Converts an `f64` constant, panicking only for unrepresentable values.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("scalar conversion")
    }
}

impl Real for f64 {
    fn norm_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn norm_tol() -> Self {
        1e-5
    }
}

/// Converts nats to bits.
pub fn to_bits<T: Real>(nats: T) -> T {
    nats / T::LN_2()
}

/// Converts bits to nats.
pub fn to_nats<T: Real>(bits: T) -> T {
    bits * T::LN_2()
}
