//! Scalar types used throughout the crate.
//!
//! Everything generic is written against [`Real`], which has two
//! implementations: [`ExtendedReal`] (MPFR float at a chosen precision) and
//! [`Exact`] (GMP rational). Quantities such as `n^-n` at `n = 200` are far
//! outside `f64` range, so nothing here goes through hardware floats except
//! explicit output conversions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

pub const DEFAULT_PRECISION: u32 = 256;

/// Working precision of [`ExtendedReal`] in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(DEFAULT_PRECISION);

    pub fn new(bits: u32) -> Self {
        assert!(bits >= 16, "precision below 16 bits is not useful");
        Precision(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + Sub<Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + Mul<Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + Div<Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    type Context: Copy + fmt::Debug + Send + Sync + 'static;

    fn context(&self) -> Self::Context;
    fn from_integer(ctx: Self::Context, value: &Integer) -> Self;
    fn from_ratio(ctx: Self::Context, num: &Integer, den: &Integer) -> Self;
    /// Exact binary value of `value`, rounded to the context.
    fn from_f64(ctx: Self::Context, value: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn pow_u32(&self, exp: u32) -> Self;
    fn to_f64(&self) -> f64;
    /// Natural log as `f64`; `-inf` at zero.
    fn ln_f64(&self) -> f64;
    /// Full-precision decimal rendering.
    fn to_decimal(&self) -> String;
    /// Relative rounding unit; zero for exact arithmetic.
    fn epsilon(ctx: Self::Context) -> Self;
    fn to_float(&self, prec: u32) -> Float;

    fn zero(ctx: Self::Context) -> Self {
        Self::from_integer(ctx, &Integer::new())
    }

    fn one(ctx: Self::Context) -> Self {
        Self::from_integer(ctx, &Integer::from(1))
    }

    fn from_u64(ctx: Self::Context, value: u64) -> Self {
        Self::from_integer(ctx, &Integer::from(value))
    }

    fn recip(&self) -> Self {
        Self::one(self.context()) / self
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Relative distance `|a - b| / max(|a|, |b|)`, zero when both vanish.
    fn relative_gap(&self, other: &Self) -> f64 {
        let diff = (self.clone() - other).abs();
        let scale = self.abs().max_of(other.abs());
        if scale.is_zero() {
            0.0
        } else {
            (diff / &scale).to_f64()
        }
    }
}

/// MPFR float; arithmetic between operands of different precision runs at
/// the larger one.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct ExtendedReal(Float);

/// GMP rational, used where answers must be compared for exact equality.
#[derive(Clone, PartialEq, PartialOrd, Eq, Ord, Hash)]
pub struct Exact(Rational);

impl ExtendedReal {
    pub fn new(value: Float) -> Self {
        ExtendedReal(value)
    }

    pub fn with_val(prec: Precision, value: f64) -> Self {
        ExtendedReal(Float::with_val(prec.bits(), value))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn precision(&self) -> Precision {
        Precision(self.0.prec())
    }

    /// Euler's number.
    pub fn e(prec: Precision) -> Self {
        ExtendedReal(Float::with_val(prec.bits(), 1).exp())
    }

    pub fn ln2(prec: Precision) -> Self {
        ExtendedReal(Float::with_val(prec.bits(), Constant::Log2))
    }

    pub fn exp(&self) -> Self {
        ExtendedReal(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        ExtendedReal(self.0.clone().ln())
    }

    pub fn factorial(prec: Precision, n: u32) -> Self {
        ExtendedReal(Float::with_val(prec.bits(), Float::factorial(n)))
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// Decimal rendering rounded to `digits` significant digits, switching
    /// to an exponent when the value is far from 1.
    pub fn to_significant(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits))
    }
}

impl Exact {
    pub fn new(value: Rational) -> Self {
        Exact(value)
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }
}

impl From<Rational> for Exact {
    fn from(value: Rational) -> Self {
        Exact(value)
    }
}

fn widen(target: &mut Float, other: &Float) {
    if other.prec() > target.prec() {
        target.set_prec(other.prec());
    }
}

impl Real for ExtendedReal {
    type Context = Precision;

    fn context(&self) -> Precision {
        Precision(self.0.prec())
    }

    fn from_integer(ctx: Precision, value: &Integer) -> Self {
        ExtendedReal(Float::with_val(ctx.bits(), value))
    }

    fn from_ratio(ctx: Precision, num: &Integer, den: &Integer) -> Self {
        let mut x = Float::with_val(ctx.bits(), num);
        x /= den;
        ExtendedReal(x)
    }

    fn from_f64(ctx: Precision, value: f64) -> Self {
        ExtendedReal(Float::with_val(ctx.bits(), value))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn abs(&self) -> Self {
        ExtendedReal(self.0.clone().abs())
    }

    fn pow_u32(&self, exp: u32) -> Self {
        ExtendedReal(self.0.clone().pow(exp))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn ln_f64(&self) -> f64 {
        if self.0.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.0.clone().ln().to_f64()
        }
    }

    fn to_decimal(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, None)
    }

    fn epsilon(ctx: Precision) -> Self {
        let mut x = Float::with_val(ctx.bits(), 1);
        x >>= ctx.bits() as i32 - 8;
        ExtendedReal(x)
    }

    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }
}

impl Real for Exact {
    type Context = ();

    fn context(&self) {}

    fn from_integer(_: (), value: &Integer) -> Self {
        Exact(Rational::from(value))
    }

    fn from_ratio(_: (), num: &Integer, den: &Integer) -> Self {
        Exact(Rational::from((num, den)))
    }

    fn from_f64(_: (), value: f64) -> Self {
        Exact(Rational::from_f64(value).expect("finite value"))
    }

    fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }

    fn abs(&self) -> Self {
        Exact(self.0.clone().abs())
    }

    fn pow_u32(&self, exp: u32) -> Self {
        Exact(self.0.clone().pow(exp))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn ln_f64(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            Float::with_val(128, &self.0).ln().to_f64()
        }
    }

    fn to_decimal(&self) -> String {
        self.0.to_string()
    }

    fn epsilon(_: ()) -> Self {
        Exact(Rational::new())
    }

    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }
}

macro_rules! forward_ops {
    ($ty:ident, $fix:expr) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                self + &rhs
            }
        }
        impl<'a> Add<&'a $ty> for $ty {
            type Output = $ty;
            fn add(mut self, rhs: &'a $ty) -> $ty {
                self += rhs;
                self
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                self - &rhs
            }
        }
        impl<'a> Sub<&'a $ty> for $ty {
            type Output = $ty;
            fn sub(mut self, rhs: &'a $ty) -> $ty {
                self -= rhs;
                self
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                self * &rhs
            }
        }
        impl<'a> Mul<&'a $ty> for $ty {
            type Output = $ty;
            fn mul(mut self, rhs: &'a $ty) -> $ty {
                self *= rhs;
                self
            }
        }
        impl Div for $ty {
            type Output = $ty;
            fn div(self, rhs: $ty) -> $ty {
                self / &rhs
            }
        }
        impl<'a> Div<&'a $ty> for $ty {
            type Output = $ty;
            fn div(mut self, rhs: &'a $ty) -> $ty {
                $fix(&mut self.0, &rhs.0);
                self.0 /= &rhs.0;
                self
            }
        }
        impl<'a> AddAssign<&'a $ty> for $ty {
            fn add_assign(&mut self, rhs: &'a $ty) {
                $fix(&mut self.0, &rhs.0);
                self.0 += &rhs.0;
            }
        }
        impl<'a> SubAssign<&'a $ty> for $ty {
            fn sub_assign(&mut self, rhs: &'a $ty) {
                $fix(&mut self.0, &rhs.0);
                self.0 -= &rhs.0;
            }
        }
        impl<'a> MulAssign<&'a $ty> for $ty {
            fn mul_assign(&mut self, rhs: &'a $ty) {
                $fix(&mut self.0, &rhs.0);
                self.0 *= &rhs.0;
            }
        }
    };
}

forward_ops!(ExtendedReal, widen);
fn keep(_: &mut Rational, _: &Rational) {}

forward_ops!(Exact, keep);

impl fmt::Debug for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(20)))
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(17)))
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

/// Clamps into `[0, 1]`, logging anything that had to be moved.
pub fn clamp_unit<T: Real>(value: T, what: &str) -> T {
    let ctx = value.context();
    let zero = T::zero(ctx);
    let one = T::one(ctx);
    if value < zero {
        log::debug!("{what}: clamped {value} up to 0");
        zero
    } else if value > one {
        log::debug!("{what}: clamped {value} down to 1");
        one
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_precision_uses_the_wider_operand() {
        let a = ExtendedReal::with_val(Precision::new(64), 1.0);
        let b = ExtendedReal::with_val(Precision::new(300), 3.0);
        let q = a / &b;
        assert_eq!(q.precision().bits(), 300);
    }

    #[test]
    fn exact_ratio_is_canonical() {
        let x = Exact::from_ratio((), &Integer::from(6), &Integer::from(8));
        assert_eq!(x.to_decimal(), "3/4");
    }

    #[test]
    fn n_to_minus_n_survives_at_n_200() {
        let p = Precision::default();
        let n = Integer::from(200);
        let tiny = ExtendedReal::from_ratio(p, &Integer::from(1), &n.clone().pow(200u32));
        assert!(!tiny.is_zero());
        assert_eq!(tiny.to_f64(), 0.0);
        assert!((tiny.ln_f64() + 200.0 * 200f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn clamp_pulls_values_into_the_unit_interval() {
        let ctx = Precision::default();
        assert_eq!(clamp_unit(ExtendedReal::from_f64(ctx, 1.5), "t"), ExtendedReal::one(ctx));
        assert_eq!(clamp_unit(ExtendedReal::from_f64(ctx, -1e-80), "t"), ExtendedReal::zero(ctx));
    }

    #[test]
    fn significant_digits() {
        let p = Precision::default();
        let two_thirds = ExtendedReal::from_ratio(p, &2.into(), &3.into());
        assert_eq!(two_thirds.to_significant(3), "6.67e-1");
        assert_eq!(ExtendedReal::from_u64(p, 4).to_significant(3), "4.00");
        assert_eq!(ExtendedReal::zero(p).to_significant(17), "0");
    }

    #[test]
    fn relative_gap_of_equal_values_is_zero() {
        let x = Exact::from_u64((), 7);
        assert_eq!(x.relative_gap(&x.clone()), 0.0);
        assert_eq!(Exact::zero(()).relative_gap(&Exact::zero(())), 0.0);
    }
}
