//! The floating-point abstraction every numeric routine in this crate is
//! generic over.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar usable by the clustering, network and evaluation code.
///
/// Implemented for `f32` and `f64`. Gradient checks and the acceptance
/// tolerances assume `f64`; `f32` trades precision for half the memory.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize representable in scalar type")
    }

    /// Widens to `f64`. Exact for both `f32` and `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sigmoid without overflow for large negative inputs.
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric_and_bounded() {
        for &x in &[-800.0_f64, -3.0, 0.0, 2.5, 800.0] {
            let s = sigmoid(x);
            assert!((0.0..=1.0).contains(&s));
            assert!((s + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(sigmoid(0.0_f32), 0.5);
    }
}
