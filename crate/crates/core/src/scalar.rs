//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the models are written against.
///
/// Implemented for `f32` and `f64`. Accuracy contracts quoted in the docs
/// (relative 1e-6 Voigt, 1e-9 integrator tolerance, ...) assume `f64`; the
/// `f32` instantiation is useful for fast sweeps where a few digits suffice.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`, rounding if needed.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Relative tolerance the integrators aim for with this precision.
    fn default_rtol() -> Self;
}

impl Real for f32 {
    fn default_rtol() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn default_rtol() -> Self {
        1e-9
    }
}

/// Shorthand for `T::lit(v)`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::lit(v)
}

/// Sums a sequence with Neumaier compensation so the result is independent
/// of partial-sum rounding in long fixed-order accumulations.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(lit::<f32>(0.25), 0.25f32);
        assert_eq!(<f64 as Real>::two(), 2.0);
    }
}
