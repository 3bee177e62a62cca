//! Real coefficient fields: double precision, or exact rationals.
//!
//! Observables, transfer-operator images and correlation terms are generic
//! over [`Scalar`]. The exact mode uses [`Rational`] so that anchor results
//! such as a variance of exactly `1/2` or `0` can be asserted with `==`.

use core::fmt::Debug;

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::float::FloatCore;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Num + Signed {
    /// Exact conversion where the field allows it; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// `|self - other| <= tol * max(1, |self|, |other|)`; exact equality for rationals.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
    /// Lossless text form: shortest round-trip decimal, or `p/q`.
    fn to_exact_string(&self) -> alloc::string::String;
    /// The exact rational value; `None` when not finite.
    fn to_rational(&self) -> Option<Rational>;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1.0f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }

    fn to_exact_string(&self) -> alloc::string::String {
        alloc::format!("{self:?}")
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self)
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Rational::zero());
        }
        // Every finite double is a dyadic rational m * 2^e.
        let (mantissa, exponent, sign) = FloatCore::integer_decode(x);
        let mut numer = BigInt::from(mantissa);
        if sign < 0 {
            numer = -numer;
        }
        let value = if exponent >= 0 {
            Rational::from_integer(numer << exponent as usize)
        } else {
            Rational::new(numer, BigInt::one() << (-exponent) as usize)
        };
        Some(value)
    }

    fn to_f64(&self) -> f64 {
        match ToPrimitive::to_f64(self) {
            Some(v) => v,
            None => {
                let n = self.numer().to_f64().unwrap_or(f64::NAN);
                let d = self.denom().to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn to_exact_string(&self) -> alloc::string::String {
        rational_string(self)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Modulus of a complex coefficient, always in double precision.
pub fn modulus<S: Scalar>(c: &Complex<S>) -> f64 {
    let re = c.re.to_f64();
    let im = c.im.to_f64();
    crate::math::sqrt(re * re + im * im)
}

pub fn complex_to_f64<S: Scalar>(c: &Complex<S>) -> Complex<f64> {
    Complex::new(c.re.to_f64(), c.im.to_f64())
}

pub fn complex_from_f64<S: Scalar>(c: Complex<f64>) -> Option<Complex<S>> {
    Some(Complex::new(S::from_f64(c.re)?, S::from_f64(c.im)?))
}

pub(crate) fn is_zero_complex<S: Scalar>(c: &Complex<S>) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Exact rational as `p/q` (or `p` when integral).
pub fn rational_string(r: &Rational) -> alloc::string::String {
    use alloc::format;
    if r.denom().sign() == Sign::Plus && r.denom() == &BigInt::one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
