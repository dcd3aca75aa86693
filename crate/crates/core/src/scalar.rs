//! Scalar abstraction for the numerical core.
//!
//! All tensor math is generic over [`Scalar`] so the same kernels run at
//! f32 or f64. The rest of the pipeline uses the f64 aliases exported from
//! the crate root; f64 keeps gradient checks and reported metrics away from
//! rounding trouble at these model sizes.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by tensors, decoders, and optimizers.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from f64 (exact for f64 itself).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Scalar")
    }

    /// Widening conversion to f64 (exact for f32 and f64).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<S: Scalar>(v: f64) -> f64 {
        S::from_f64_lossy(v).as_f64()
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        for v in [0.0, 1.0, -2.5, 1e-300, 123.456789] {
            assert_eq!(roundtrip::<f64>(v), v);
        }
    }

    #[test]
    fn f32_roundtrip_loses_only_precision() {
        let v = 0.1f64;
        let r = roundtrip::<f32>(v);
        assert!((r - v).abs() < 1e-7);
    }
}
