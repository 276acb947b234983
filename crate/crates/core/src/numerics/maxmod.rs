//! Maximum modulus of a function on a circle.

use super::complex::Complex;
use super::real::Real;
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 1024;

#[derive(Clone, Debug)]
pub struct MaxModulus {
    pub value: Real,
    pub point: Complex,
    pub theta: f64,
}

fn circle_point(r: &Real, theta: f64) -> Complex {
    let bits = r.bits();
    let t = Real::from_f64(theta, bits);
    Complex::new(r * &t.cos(), r * &t.sin())
}

/// `max |f(x)|` over `|x| = r`: `samples` equally spaced points, then one
/// golden-section refinement on the arc around the best sample.
pub fn max_modulus<F>(f: F, r: &Real, samples: usize) -> Result<MaxModulus>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    if samples < 8 {
        return Err(Error::Precondition(format!("samples = {samples} < 8")));
    }
    let eval = |theta: f64| -> Result<(Real, Complex)> {
        let x = circle_point(r, theta);
        let v = f(&x)?;
        if !v.is_finite() {
            return Err(Error::Evaluation { point: format!("{x}"), reason: "non-finite value".into() });
        }
        Ok((v.abs(), x))
    };
    let step = std::f64::consts::TAU / samples as f64;
    let mut best: Option<(Real, Complex, f64)> = None;
    for k in 0..samples {
        let theta = k as f64 * step;
        let (m, x) = eval(theta)?;
        if best.as_ref().map_or(true, |b| m > b.0) {
            best = Some((m, x, theta));
        }
    }
    let (mut bv, mut bx, mut bt) = best.expect("samples >= 8");
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (bt - step, bt + step);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..40 {
        if fc.0 > fd.0 {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
        }
    }
    for (cand, t) in [(fc, c), (fd, d)] {
        if cand.0 > bv {
            bv = cand.0;
            bx = cand.1;
            bt = t;
        }
    }
    Ok(MaxModulus { value: bv, point: bx, theta: bt.rem_euclid(std::f64::consts::TAU) })
}
