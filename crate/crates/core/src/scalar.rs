//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the physics is written against (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}` with exact values at integer multiples of π/2.
///
/// A phase within 8 ulp of `k·π/2` maps to exactly `1`, `i`, `-1` or `-i`, so
/// that cancellations such as `J e^{iπ/2} - iG` vanish identically at `J = G`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    match quarter_turns(theta) {
        Some(k) => match k.rem_euclid(4) {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        },
        None => Complex::new(theta.cos(), theta.sin()),
    }
}

/// The integer `k` when `theta` is (to within a few ulp) exactly `k·π/2`.
pub fn quarter_turns<T: Real>(theta: T) -> Option<i64> {
    if !theta.is_finite() {
        return None;
    }
    let half_pi = T::FRAC_PI_2();
    let k = (theta / half_pi).round();
    let slack = T::lit(8.0) * T::epsilon() * theta.abs().max(T::one());
    if (theta - k * half_pi).abs() <= slack {
        k.to_i64()
    } else {
        None
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(theta: T) -> T {
    let tau = T::PI() + T::PI();
    let w = theta % tau;
    let w = if w < T::zero() { w + tau } else { w };
    if w >= tau {
        T::zero()
    } else {
        w
    }
}

/// Principal square root with the branch cut on the negative real axis.
pub fn principal_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    z.sqrt()
}

pub(crate) fn i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
