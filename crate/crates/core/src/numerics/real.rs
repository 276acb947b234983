//! Configurable-precision real numbers.
//!
//! [`Real`] wraps an `astro-float` binary float and records the working
//! precision it was created with. Binary operations produce a result at the
//! smaller of the two operand precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

const RM: RoundingMode = RoundingMode::ToEven;

/// Smallest precision accepted by [`PrecisionPolicy`].
pub const MIN_BITS: usize = 53;
/// Largest precision accepted by [`PrecisionPolicy`].
pub const MAX_BITS: usize = 1 << 16;
/// Precision used when nothing else is requested.
pub const DEFAULT_BITS: usize = 128;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision, in significand bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrecisionPolicy {
    bits: usize,
}

impl PrecisionPolicy {
    pub fn new(bits: usize) -> Result<Self, Error> {
        if bits < MIN_BITS {
            return Err(Error::PrecisionTooLow(bits));
        }
        if bits > MAX_BITS {
            return Err(Error::PrecisionTooHigh(bits));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> usize {
        self.bits
    }

    /// Twice the precision; used by two-precision agreement checks.
    pub fn doubled(self) -> Self {
        Self { bits: self.bits * 2 }
    }

    /// `2^(-bits/k)`, the relative thresholds used across the crate.
    pub fn eps_fraction(self, k: usize) -> f64 {
        2f64.powf(-(self.bits as f64) / k as f64)
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self { bits: DEFAULT_BITS }
    }
}

/// A binary floating-point real carried at a declared precision.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    bits: usize,
}

impl Real {
    fn wrap(v: BigFloat, bits: usize) -> Self {
        Self { v, bits }
    }

    pub fn zero(bits: usize) -> Self {
        Self::wrap(BigFloat::from_word(0, bits), bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::wrap(BigFloat::from_word(1, bits), bits)
    }

    pub fn from_f64(v: f64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_f64(v, bits), bits)
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(v, bits), bits)
    }

    pub fn from_u64(v: u64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_u64(v, bits), bits)
    }

    pub fn from_bigint(v: &BigInt, bits: usize) -> Self {
        if v.is_zero() {
            return Self::zero(bits);
        }
        let (sign, words) = v.to_u64_digits();
        let s = if sign == BigSign::Minus { Sign::Neg } else { Sign::Pos };
        let e = (words.len() * 64) as i32;
        let full = BigFloat::from_words(&words, s, e);
        let mut out = full;
        let _ = out.set_precision(bits, RM);
        Self::wrap(out, bits)
    }

    pub fn from_rational(v: &BigRational, bits: usize) -> Self {
        let work = bits + 64;
        let n = Self::from_bigint(v.numer(), work);
        let d = Self::from_bigint(v.denom(), work);
        (&n / &d).with_bits(bits)
    }

    pub fn pi(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(bits, RM)), bits)
    }

    pub fn ln2(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.ln_2(bits, RM)), bits)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Rounds (or extends) to a new precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.v.clone();
        let _ = v.set_precision(bits, RM);
        Self::wrap(v, bits)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.bits)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.bits, RM), self.bits)
    }

    pub fn exp(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.exp(bits, RM, cc)), bits)
    }

    pub fn ln(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.ln(bits, RM, cc)), bits)
    }

    pub fn sin(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.sin(bits, RM, cc)), bits)
    }

    pub fn cos(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.cos(bits, RM, cc)), bits)
    }

    pub fn sinh(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.sinh(bits, RM, cc)), bits)
    }

    pub fn cosh(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.cosh(bits, RM, cc)), bits)
    }

    pub fn atan(&self) -> Self {
        let bits = self.bits;
        Self::wrap(with_consts(|cc| self.v.atan(bits, RM, cc)), bits)
    }

    /// Four-quadrant arctangent of `y/x` with `self` as `y`.
    pub fn atan2(&self, x: &Real) -> Self {
        let bits = self.bits.min(x.bits);
        let pi = Real::pi(bits);
        if x.is_zero() {
            if self.is_zero() {
                return Real::zero(bits);
            }
            let half = pi.mul_f64(0.5);
            return if self.is_negative() { -half } else { half };
        }
        if self.abs() <= x.abs() {
            let base = (self / x).atan();
            if !x.is_negative() {
                base
            } else if self.is_negative() {
                base - pi
            } else {
                base + pi
            }
        } else {
            // |y| > |x|: atan(y/x) = sign(y)*pi/2 - atan(x/y)
            let half = pi.mul_f64(0.5);
            let t = (x / self).atan();
            if self.is_negative() {
                -half - t
            } else {
                half - t
            }
        }
    }

    pub fn powi(&self, n: u64) -> Self {
        if n == 0 {
            return Real::one(self.bits);
        }
        Self::wrap(self.v.powi(n as usize, self.bits, RM), self.bits)
    }

    pub fn pow(&self, e: &Real) -> Self {
        let bits = self.bits.min(e.bits);
        Self::wrap(with_consts(|cc| self.v.pow(&e.v, bits, RM, cc)), bits)
    }

    pub fn mul_f64(&self, s: f64) -> Self {
        self * &Real::from_f64(s, self.bits)
    }

    pub fn add_f64(&self, s: f64) -> Self {
        self + &Real::from_f64(s, self.bits)
    }

    pub fn div_u64(&self, d: u64) -> Self {
        self / &Real::from_u64(d, self.bits)
    }

    pub fn max(&self, other: &Real) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Binary exponent `e` with `|self| = 0.m * 2^e`, `0.5 <= 0.m < 1`.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() || !self.is_finite() {
            return None;
        }
        self.v.exponent().map(|e| e as i64)
    }

    fn mantissa_fraction(&self) -> f64 {
        match self.v.as_raw_parts() {
            Some((words, _, _, _, _)) if !words.is_empty() => {
                let top = *words.last().unwrap() as f64;
                let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
                (top + next / 18446744073709551616.0) / 18446744073709551616.0
            }
            _ => 0.0,
        }
    }

    /// Nearest `f64`; saturates to ±inf or 0 outside the double range.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some(e) = self.exponent() else { return 0.0 };
        let m = self.mantissa_fraction();
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            m * 2f64.powi(e as i32)
        };
        if self.is_negative() {
            -mag
        } else {
            mag
        }
    }

    /// Natural log of `|self|` as an `f64`, valid far outside the double range.
    pub fn ln_abs_f64(&self) -> f64 {
        match self.exponent() {
            None if self.is_zero() => f64::NEG_INFINITY,
            None => f64::INFINITY,
            Some(e) => e as f64 * std::f64::consts::LN_2 + self.mantissa_fraction().ln(),
        }
    }

    /// Nearest integer, rounding half away from zero.
    pub fn round_to_bigint(&self) -> Option<BigInt> {
        if !self.is_finite() {
            return None;
        }
        let half = Real::from_f64(0.5, self.bits);
        let shifted = if self.is_negative() { self - &half } else { self + &half };
        let t = Self::wrap(shifted.v.int(), self.bits);
        if t.is_zero() {
            return Some(BigInt::zero());
        }
        let (words, nbits, sign, e, _) = t.v.as_raw_parts()?;
        let mut mag = BigUint::zero();
        for w in words.iter().rev() {
            mag = (mag << 64u32) + BigUint::from(*w);
        }
        let total = (words.len() * 64) as i64;
        let _ = nbits;
        let shift = total - e as i64;
        let mag = if shift >= 0 { mag >> (shift as u64) } else { mag << ((-shift) as u64) };
        let s = if sign == Sign::Neg { BigSign::Minus } else { BigSign::Plus };
        Some(BigInt::from_biguint(s, mag))
    }

    /// Scientific-notation decimal string with `digits` significant digits,
    /// trailing zeros removed. Integers that fit are printed without exponent.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.v.is_nan() {
            return "NaN".into();
        }
        if self.v.is_inf() {
            return if self.is_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.is_zero() {
            return "0".into();
        }
        let digits = digits.max(1);
        let work = self.bits.max((digits as f64 * 3.33) as usize + 64);
        let x = self.with_bits(work);
        let mut e10 = (x.ln_abs_f64() / std::f64::consts::LN_10).floor() as i64;
        let mut mant = None;
        for _ in 0..3 {
            let scale = digits as i64 - 1 - e10;
            let ten = Real::from_u64(10, work);
            let p = ten.powi(scale.unsigned_abs());
            let scaled = if scale >= 0 { &x * &p } else { &x / &p };
            let n = scaled.round_to_bigint().unwrap_or_default();
            let len = n.abs().to_string().len() as i64;
            if len > digits as i64 {
                e10 += 1;
                continue;
            }
            if len < digits as i64 {
                e10 -= 1;
                continue;
            }
            mant = Some(n);
            break;
        }
        let n = match mant {
            Some(n) => n,
            None => return format!("{:e}", self.to_f64()),
        };
        let neg = n.is_negative();
        let s = n.abs().to_string();
        let (int_part, frac_part) = s.split_at(1);
        let frac = frac_part.trim_end_matches('0');
        let sign = if neg { "-" } else { "" };
        if (0..21).contains(&e10) && (frac.len() as i64) <= e10 {
            let mut body = String::from(int_part);
            body.push_str(frac);
            for _ in 0..(e10 as usize + 1 - body.len()) {
                body.push('0');
            }
            return format!("{sign}{body}");
        }
        if frac.is_empty() {
            format!("{sign}{int_part}e{e10}")
        } else {
            format!("{sign}{int_part}.{frac}e{e10}")
        }
    }

    /// Significand digits worth printing at this precision.
    pub fn natural_digits(&self) -> usize {
        ((self.bits as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(self.natural_digits()))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let bits = self.bits.min(rhs.bits);
                Real::wrap(self.v.$m(&rhs.v, bits, RM), bits)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

/// Converts an exact rational to `f64` (nearest, saturating).
pub fn rational_to_f64(v: &BigRational) -> f64 {
    match (v.numer().to_f64(), v.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => Real::from_rational(v, 64).to_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for v in [1.0, -0.75, 3.0e-300, 1.0e300, 123.456] {
            assert_eq!(Real::from_f64(v, 128).to_f64(), v);
        }
    }

    #[test]
    fn huge_exponents_survive() {
        let x = Real::from_f64(1e300, 128);
        let y = &(&x * &x) * &x;
        assert!((y.ln_abs_f64() - 900.0 * std::f64::consts::LN_10).abs() < 1e-9);
        assert_eq!(y.to_f64(), f64::INFINITY);
    }

    #[test]
    fn bigint_and_rational_conversion() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let r = Real::from_bigint(&big, 200);
        assert_eq!(r.round_to_bigint().unwrap(), big);
        let q = BigRational::new(BigInt::from(-1), BigInt::from(3));
        assert!((Real::from_rational(&q, 128).to_f64() + 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(Real::from_f64(1.0, 128).to_decimal_string(30), "1");
        assert_eq!(Real::from_f64(-45.0, 128).to_decimal_string(30), "-45");
        assert_eq!(Real::from_f64(0.125, 128).to_decimal_string(30), "1.25e-1");
        assert_eq!(Real::from_f64(2.5e10, 128).to_decimal_string(5), "25000000000");
        assert_eq!(Real::from_f64(2.5e40, 128).to_decimal_string(5), "2.5e40");
        let third = &Real::one(128) / &Real::from_u64(3, 128);
        assert_eq!(third.to_decimal_string(5), "3.3333e-1");
    }

    #[test]
    fn atan2_quadrants() {
        let pi = std::f64::consts::PI;
        let cases = [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (2.0, 0.1), (0.0, -1.0)];
        for (y, x) in cases {
            let got = Real::from_f64(y, 128).atan2(&Real::from_f64(x, 128)).to_f64();
            let want = f64::atan2(y, x);
            assert!((got - want).abs() < 1e-15, "{y} {x}: {got} vs {want}");
        }
        assert!((Real::pi(128).to_f64() - pi).abs() < 1e-16);
    }

    #[test]
    fn precision_is_min_of_operands() {
        let a = Real::one(256);
        let b = Real::one(128);
        assert_eq!((&a + &b).bits(), 128);
        assert!(PrecisionPolicy::new(52).is_err());
        assert_eq!(PrecisionPolicy::default().bits(), 128);
    }
}
