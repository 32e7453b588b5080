// SPDX-License-Identifier: Apache-2.0

//! Scalar trait and small numerical helpers shared by the core modules.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Convert a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Principal complex square root, accurate componentwise near the branch cut.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let (x, y) = (z.re, z.im);
    if x.is_zero() && y.is_zero() {
        return Complex::new(T::zero(), y);
    }
    let half = lit::<T>(0.5);
    let t = ((x.abs() + x.hypot(y)) * half).sqrt();
    if x >= T::zero() {
        Complex::new(t, y / (t + t))
    } else {
        Complex::new(y.abs() / (t + t), t.copysign(y))
    }
}

/// `exp(x)` flushed to zero below the double-precision underflow threshold.
#[inline]
pub fn exp_clamped<T: Real>(x: T) -> T {
    if x < lit(-745.0) {
        T::zero()
    } else {
        x.exp()
    }
}

/// `exp(-i z t)` for complex `z` with `Im z <= 0`, flushed to zero on underflow.
#[inline]
pub fn expi<T: Real>(z: Complex<T>, t: T) -> Complex<T> {
    let mag = exp_clamped(z.im * t);
    if mag.is_zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let phase = -z.re * t;
    Complex::new(mag * phase.cos(), mag * phase.sin())
}
