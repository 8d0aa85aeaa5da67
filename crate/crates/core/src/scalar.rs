//! Scalar abstraction shared by every module.
//!
//! The numerics are written once against [`Real`] and instantiated for `f64`
//! (the precision every default tolerance is calibrated for) and `f32`.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::Debug;

/// Real field the library is generic over.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;
/// Complex column vector.
pub type CVec<T> = DVector<Complex<T>>;
/// Complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

pub fn iunit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

pub fn from_real<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// Modulus without overflow.
pub fn cabs<T: Real>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}

pub fn cexp<T: Real>(z: Cx<T>) -> Cx<T> {
    ComplexField::exp(z)
}

pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    ComplexField::sqrt(z)
}

/// `z^n` for integer `n` by repeated multiplication.
pub fn cpowi<T: Real>(z: Cx<T>, n: i32) -> Cx<T> {
    let mut acc = cone::<T>();
    let base = if n < 0 { cone::<T>() / z } else { z };
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    acc
}

/// `max(1, |z|)`, the scale used by relative point tolerances.
pub fn scale_of<T: Real>(z: Cx<T>) -> T {
    let a = cabs(z);
    if a > T::one() {
        a
    } else {
        T::one()
    }
}

pub fn pi<T: Real>() -> T {
    T::pi()
}

/// Falling factorial `n (n-1) ... (n-k+1)` as a real, valid for negative `n`.
pub fn falling<T: Real>(n: i32, k: u32) -> T {
    let mut acc = T::one();
    for j in 0..k as i32 {
        acc *= T::lit(f64::from(n - j));
    }
    acc
}

pub fn factorial<T: Real>(k: u32) -> T {
    falling(k as i32, k)
}

/// Entrywise-conjugated copy of a vector.
pub fn vconj<T: Real>(v: &CVec<T>) -> CVec<T> {
    v.map(|z| z.conj())
}

/// Hermitian inner product `<x, y> = y^H x`.
pub fn dot<T: Real>(x: &CVec<T>, y: &CVec<T>) -> Cx<T> {
    y.dotc(x)
}

/// Replaces real or imaginary parts below `eps * max(1, |z|)` by exact zeros.
pub fn snap<T: Real>(z: Cx<T>, eps: T) -> Cx<T> {
    let s = eps * scale_of(z);
    let re = if z.re.abs() < s { T::zero() } else { z.re };
    let im = if z.im.abs() < s { T::zero() } else { z.im };
    Complex::new(re, im)
}

/// `[re, im]` pair for serialization.
pub fn pair<T: Real>(z: Cx<T>) -> [f64; 2] {
    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
}

pub fn unpair<T: Real>(p: [f64; 2]) -> Cx<T> {
    cx(p[0], p[1])
}

/// Rounds to `digits` significant decimal digits (for stable report output).
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s: f64 = format!("{:.*e}", (digits - 1).max(0) as usize, x).parse().unwrap_or(x);
    if s == 0.0 {
        0.0
    } else {
        s
    }
}
