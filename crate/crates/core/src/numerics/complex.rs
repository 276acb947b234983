//! Complex numbers over [`Real`], with the square-root branch used for node
//! arithmetic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;

use super::real::Real;

#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn zero(bits: usize) -> Self {
        Self::new(Real::zero(bits), Real::zero(bits))
    }

    pub fn one(bits: usize) -> Self {
        Self::new(Real::one(bits), Real::zero(bits))
    }

    pub fn i(bits: usize) -> Self {
        Self::new(Real::zero(bits), Real::one(bits))
    }

    pub fn from_f64(re: f64, im: f64, bits: usize) -> Self {
        Self::new(Real::from_f64(re, bits), Real::from_f64(im, bits))
    }

    pub fn from_real(re: Real) -> Self {
        let bits = re.bits();
        Self::new(re, Real::zero(bits))
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Self::from_real(Real::from_i64(v, bits))
    }

    pub fn from_rational(v: &BigRational, bits: usize) -> Self {
        Self::from_real(Real::from_rational(v, bits))
    }

    pub fn bits(&self) -> usize {
        self.re.bits().min(self.im.bits())
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        Self::new(self.re.with_bits(bits), self.im.with_bits(bits))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> Real {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Real {
        self.im.atan2(&self.re)
    }

    pub fn scale(&self, s: &Real) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        self.scale(&Real::from_f64(s, self.bits()))
    }

    pub fn mul_i(&self) -> Self {
        Self::new(-&self.im, self.re.clone())
    }

    pub fn add_real(&self, s: &Real) -> Self {
        Self::new(&self.re + s, self.im.clone())
    }

    pub fn add_f64(&self, s: f64) -> Self {
        Self::new(self.re.add_f64(s), self.im.clone())
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Self::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn powi(&self, n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Complex::one(self.bits());
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Square root with `arg` in `(-pi/2, pi/2]`: the cut is the negative
    /// real axis and points on it map to the positive imaginary axis.
    pub fn sqrt_w(&self) -> Self {
        let bits = self.bits();
        if self.is_zero() {
            return Complex::zero(bits);
        }
        let m = self.abs();
        let t = (&(&m + &self.re.abs()) * &Real::from_f64(0.5, bits)).sqrt();
        let two_t = &t + &t;
        if !self.re.is_negative() {
            Self::new(t, &self.im / &two_t)
        } else {
            let re = &self.im.abs() / &two_t;
            let im = if self.im.is_negative() { -t } else { t };
            Self::new(re, im)
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.re.exp();
        if self.im.is_zero() {
            return Self::from_real(e);
        }
        Self::new(&e * &self.im.cos(), &e * &self.im.sin())
    }

    /// Principal logarithm, imaginary part in `(-pi, pi]`.
    pub fn ln(&self) -> Self {
        Self::new(self.abs().ln(), self.arg())
    }

    /// Principal power `exp(w ln z)`; `0^w = 0`.
    pub fn pow(&self, w: &Complex) -> Self {
        if self.is_zero() {
            return Complex::zero(self.bits().min(w.bits()));
        }
        (w * &self.ln()).exp()
    }

    pub fn sin(&self) -> Self {
        Self::new(&self.re.sin() * &self.im.cosh(), &self.re.cos() * &self.im.sinh())
    }

    pub fn cos(&self) -> Self {
        Self::new(&self.re.cos() * &self.im.cosh(), -(&self.re.sin() * &self.im.sinh()))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// `|self - other| / max(|other|, floor)` evaluated in `f64` log space.
    pub fn rel_diff(&self, other: &Complex, floor: f64) -> f64 {
        let d = (self - other).abs();
        let scale = other.abs().ln_abs_f64().max(floor.ln());
        (d.ln_abs_f64() - scale).exp()
    }
}

/// `node(x, m) = (sqrt_w(x) + m i/2)^2`, the m-th point of the Wilson lattice.
pub fn node(x: &Complex, m: i64) -> Complex {
    let w = x.sqrt_w();
    lattice_point(&w, m)
}

/// `(w + m i/2)^2` for a fixed square root `w`.
pub fn lattice_point(w: &Complex, m: i64) -> Complex {
    let bits = w.bits();
    let shifted = Complex::new(w.re.clone(), &w.im + &Real::from_f64(m as f64 * 0.5, bits));
    &shifted * &shifted
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

macro_rules! forward {
    ($tr:ident, $m:ident) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: &Complex) -> Complex {
                (&self).$m(rhs)
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                self.$m(&rhs)
            }
        }
    };
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        if rhs.im.is_zero() {
            return Complex::new(&self.re * &rhs.re, &self.im * &rhs.re);
        }
        if self.im.is_zero() {
            return Complex::new(&self.re * &rhs.re, &self.re * &rhs.im);
        }
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        Complex::new(re, im)
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        if rhs.im.is_zero() {
            return Complex::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        let d = rhs.norm_sqr();
        let re = &(&self.re * &rhs.re) + &(&self.im * &rhs.im);
        let im = &(&self.im * &rhs.re) - &(&self.re * &rhs.im);
        Complex::new(&re / &d, &im / &d)
    }
}

forward!(Add, add);
forward!(Sub, sub);
forward!(Mul, mul);
forward!(Div, div);

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, 128)
    }

    fn close(a: &Complex, re: f64, im: f64) -> bool {
        let (x, y) = a.to_f64_pair();
        (x - re).abs() < 1e-14 && (y - im).abs() < 1e-14
    }

    #[test]
    fn sqrt_branch_examples() {
        assert!(close(&c(4.0, 0.0).sqrt_w(), 2.0, 0.0));
        assert!(close(&c(-1.0, 0.0).sqrt_w(), 0.0, 1.0));
        assert!(close(&c(-0.25, 0.0).sqrt_w(), 0.0, 0.5));
        assert!(c(0.0, 0.0).sqrt_w().is_zero());
        let w = c(-3.0, -4.0).sqrt_w();
        assert!(close(&w, 1.0, -2.0));
    }

    #[test]
    fn node_examples() {
        let zero = c(0.0, 0.0);
        assert!(close(&node(&zero, 1), -0.25, 0.0));
        for j in 1..=3i64 {
            assert!(close(&node(&zero, 2 * j), -(j * j) as f64, 0.0));
        }
        let x = c(2.5, -1.0);
        assert!(close(&node(&x, 0), 2.5, -1.0));
    }

    #[test]
    fn elementary_functions() {
        let z = c(0.3, -1.2);
        let back = z.ln().exp();
        assert!(back.rel_diff(&z, 1e-300) < 1e-35);
        let s = z.sin();
        let co = z.cos();
        let one = &(&s * &s) + &(&co * &co);
        assert!(close(&one, 1.0, 0.0));
        let p = c(2.0, 0.0).pow(&c(10.0, 0.0));
        assert!(close(&p, 1024.0, 0.0) || p.rel_diff(&c(1024.0, 0.0), 1.0) < 1e-30);
    }

    #[test]
    fn division_and_powi() {
        let a = c(1.0, 2.0);
        let b = c(-3.0, 0.5);
        let q = &a / &b;
        assert!((&q * &b).rel_diff(&a, 1e-300) < 1e-35);
        assert!(close(&a.powi(3), -11.0, -2.0));
    }
}
