//! Coefficient fields shared by every module.
//!
//! Exact work runs over [`Rational`] (arbitrary precision) and
//! `Complex<Rational>`; numerics run over `f64` and `Complex<f64>`.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive};

pub type Rational = BigRational;

/// Shorthand for an exact rational `num / den`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(v: &Rational) -> Self;
    /// Absolute value as a float, used for tolerances and reports.
    fn magnitude(&self) -> f64;
    /// True for exact fields, where "negligible" means exactly zero.
    fn is_exact() -> bool;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&q(num, den))
    }

    fn is_negligible(&self, tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

pub trait RealScalar: Scalar + PartialOrd {
    fn to_f64(&self) -> f64;
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN).abs()
    }
    fn is_exact() -> bool {
        true
    }
}

impl RealScalar for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(v: &Rational) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact() -> bool {
        false
    }
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl<T: RealScalar> Scalar for Complex<T> {
    fn from_i64(v: i64) -> Self {
        Complex::new(T::from_i64(v), T::zero())
    }
    fn from_rational(v: &Rational) -> Self {
        Complex::new(T::from_rational(v), T::zero())
    }
    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
    fn is_exact() -> bool {
        T::is_exact()
    }
}

/// Embed a real scalar into the complex field.
pub fn complexify<T: RealScalar>(x: &T) -> Complex<T> {
    Complex::new(x.clone(), T::zero())
}

/// The imaginary unit times `x`.
pub fn times_i<T: RealScalar>(z: &Complex<T>) -> Complex<T> {
    Complex::new(-z.im.clone(), z.re.clone())
}

pub fn sign<T: Scalar>(negative: bool) -> T {
    if negative {
        -T::one()
    } else {
        T::one()
    }
}

/// `(-1)^k` as an integer.
pub fn parity(k: u32) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn rational_to_string(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}
