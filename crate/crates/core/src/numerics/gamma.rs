//! Complex log-gamma and reciprocal gamma via the Lanczos approximation.

use super::complex::Complex;
use super::real::Real;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Returns `Some(n)` when `z` is the non-positive integer `-n`.
fn nonpositive_integer(z: &Complex) -> Option<i64> {
    if !z.im.is_zero() || z.re.is_negative() == false && !z.re.is_zero() {
        return None;
    }
    let n = z.re.round_to_bigint()?;
    let back = Real::from_bigint(&n, z.bits());
    if back == z.re {
        i64::try_from(n).ok()
    } else {
        None
    }
}

fn lanczos_series(zm1: &Complex) -> Complex {
    let bits = zm1.bits();
    let mut acc = Complex::from_f64(LANCZOS[0], 0.0, bits);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        let denom = zm1.add_f64(k as f64);
        acc = &acc + &Complex::from_f64(*c, 0.0, bits).div_by(&denom);
    }
    acc
}

impl Complex {
    fn div_by(&self, d: &Complex) -> Complex {
        self / d
    }
}

fn log_gamma_right(z: &Complex) -> Complex {
    let bits = z.bits();
    let zm1 = z.add_f64(-1.0);
    let t = zm1.add_f64(LANCZOS_G + 0.5);
    let half_ln_2pi = (&Real::pi(bits) * &Real::from_u64(2, bits)).ln().mul_f64(0.5);
    let a = lanczos_series(&zm1);
    let main = &zm1.add_f64(0.5) * &t.ln();
    (&(&main - &t) + &a.ln()).add_real(&half_ln_2pi)
}

/// Principal log-gamma. In the left half-plane the value comes from the
/// reflection formula, so its imaginary part is fixed only modulo `2 pi`.
pub fn log_gamma(z: &Complex) -> Result<Complex> {
    if nonpositive_integer(z).is_some() {
        return Err(Error::Pole(format!("{z}")));
    }
    if z.re.to_f64() >= 0.5 {
        return Ok(log_gamma_right(z));
    }
    let bits = z.bits();
    let pi = Real::pi(bits);
    let s = z.scale(&pi).sin();
    let one_minus = Complex::one(bits) - z;
    let r = log_gamma_right(&one_minus);
    Ok((&Complex::from_real(pi.ln()) - &s.ln()) - r)
}

/// `1 / Gamma(z)`, entire; exactly zero at the poles of Gamma.
pub fn reciprocal_gamma(z: &Complex) -> Complex {
    let bits = z.bits();
    if nonpositive_integer(z).is_some() {
        return Complex::zero(bits);
    }
    if z.re.to_f64() >= 0.5 {
        return (-log_gamma_right(z)).exp();
    }
    let pi = Real::pi(bits);
    let s = z.scale(&pi).sin();
    let one_minus = Complex::one(bits) - z;
    let g = log_gamma_right(&one_minus).exp();
    (&s * &g).scale(&(&Real::one(bits) / &pi))
}

pub fn gamma(z: &Complex) -> Result<Complex> {
    Ok(log_gamma(z)?.exp())
}
