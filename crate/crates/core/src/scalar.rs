//! Scalar abstraction shared by every analysis module.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real field the analysis runs over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    ///
    /// Values below the type's range flush to the smallest positive normal
    /// value (or its negation) so tiny guard thresholds never become zero.
    fn lit(x: f64) -> Self {
        let v = Self::from_f64(x).unwrap_or_else(Self::nan);
        if v == Self::zero() && x != 0.0 {
            if x > 0.0 {
                Self::min_positive_value()
            } else {
                -Self::min_positive_value()
            }
        } else {
            v
        }
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

pub(crate) fn is_finite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Reduces an angle to `[0, 2π)` by floor division.
pub fn normalize_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut r = theta - two_pi * (theta / two_pi).floor();
    if r >= two_pi {
        r = r - two_pi;
    }
    if r < T::zero() {
        r = r + two_pi;
    }
    // rounding can leave a value indistinguishable from 2π
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Shortest signed angular distance from `b` to `a`, in `(-π, π]`.
pub fn angle_diff<T: Real>(a: T, b: T) -> T {
    let d = normalize_angle(a - b);
    if d > T::PI() {
        d - T::TAU()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_wraps_into_range() {
        let tau = std::f64::consts::TAU;
        assert_eq!(normalize_angle(0.0_f64), 0.0);
        assert!((normalize_angle(-std::f64::consts::FRAC_PI_2) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((normalize_angle(tau + 0.25) - 0.25).abs() < 1e-15);
        assert_eq!(normalize_angle(tau), 0.0);
        let tiny_below = -1e-18_f64;
        let r = normalize_angle(tiny_below);
        assert!((0.0..tau).contains(&r));
    }

    #[test]
    fn angle_diff_is_signed_and_short() {
        let pi = std::f64::consts::PI;
        assert!((angle_diff(0.1_f64, 2.0 * pi - 0.1) - 0.2).abs() < 1e-14);
        assert!((angle_diff(2.0 * pi - 0.1, 0.1_f64) + 0.2).abs() < 1e-14);
    }

    #[test]
    fn lit_never_flushes_guard_thresholds_to_zero() {
        assert!(<f32 as Real>::lit(1e-300) > 0.0);
        assert_eq!(<f64 as Real>::lit(1e-300), 1e-300);
    }
}
