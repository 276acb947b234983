//! Linear Wilson difference equations with polynomial coefficients, their
//! Newton polygons, and the Bessel and reciprocal-gamma test functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{reciprocal_gamma, Complex, Real};
use crate::operators::{apply_dw, dw_n, FunctionHandle};

/// `a_n D_W^n y + ... + a_1 D_W y + a_0 y = 0`, with `coeff_polys[k]` the
/// ascending coefficients of `a_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WilsonDifferenceEquation {
    coeff_polys: Vec<Vec<BigRational>>,
}

fn trim(p: &[BigRational]) -> Vec<BigRational> {
    let end = p.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    p[..end].to_vec()
}

fn degree(p: &[BigRational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&c| BigRational::from_integer(c.into())).collect()
}

impl WilsonDifferenceEquation {
    pub fn new(coeff_polys: Vec<Vec<BigRational>>) -> Result<Self> {
        let coeff_polys: Vec<Vec<BigRational>> = coeff_polys.iter().map(|p| trim(p)).collect();
        if coeff_polys.iter().all(|p| p.is_empty()) {
            return Err(Error::Precondition("all coefficients of the equation vanish".into()));
        }
        match coeff_polys.last() {
            Some(p) if !p.is_empty() => Ok(Self { coeff_polys }),
            _ => Err(Error::Precondition("leading coefficient a_n vanishes identically".into())),
        }
    }

    /// `4x(4x+1)^2 D^2 y - 16x(8x^2+4x+1) D y + (64x^3+32x^2+16x+5) y = 0`,
    /// satisfied by `1/Gamma(2i sqrt x) + 1/Gamma(-2i sqrt x)`.
    pub fn gamma_counterexample() -> Self {
        Self::new(vec![ints(&[5, 16, 32, 64]), ints(&[0, -16, -64, -128]), ints(&[0, 4, 32, 64])])
            .expect("nonzero leading coefficient")
    }

    /// `D_W y - lambda y = 0` for real rational `lambda`.
    pub fn eigen(lambda: BigRational) -> Self {
        Self::new(vec![vec![-lambda], ints(&[1])]).expect("nonzero leading coefficient")
    }

    pub fn order(&self) -> usize {
        self.coeff_polys.len() - 1
    }

    pub fn coeff_polys(&self) -> &[Vec<BigRational>] {
        &self.coeff_polys
    }

    /// `a_k(x)`.
    pub fn coeff_at(&self, k: usize, x: &Complex) -> Complex {
        let bits = x.bits();
        let mut acc = Complex::zero(bits);
        for c in self.coeff_polys[k].iter().rev() {
            acc = (&acc * x).add_real(&Real::from_rational(c, bits));
        }
        acc
    }

    /// Every `a_k` multiplied by `x`.
    pub fn times_x(&self) -> Self {
        let polys = self
            .coeff_polys
            .iter()
            .map(|p| if p.is_empty() { Vec::new() } else { std::iter::once(BigRational::zero()).chain(p.iter().cloned()).collect() })
            .collect();
        Self { coeff_polys: polys }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    /// `(k, deg a_{n-k} - (n-k))` for every nonzero `a_{n-k}`.
    pub points: Vec<(i64, i64)>,
    /// Upper convex chain from the leftmost to the rightmost point.
    pub hull_vertices: Vec<(i64, i64)>,
    /// Edge slopes in ascending order.
    pub slopes: Vec<BigRational>,
    /// The positive slopes.
    pub predicted_orders: Vec<BigRational>,
    /// Predicted orders below 1/3.
    pub admissible: Vec<BigRational>,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Newton polygon of the equation. Only the finite upper chain is kept; the
/// unbounded rays of the hull carry no slope.
pub fn newton_polygon(eq: &WilsonDifferenceEquation) -> NewtonPolygon {
    let n = eq.order() as i64;
    let mut points: Vec<(i64, i64)> = (0..=n)
        .filter_map(|k| {
            let idx = (n - k) as usize;
            degree(&eq.coeff_polys[idx]).map(|d| (k, d as i64 - (n - k)))
        })
        .collect();
    points.sort();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in &points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let mut slopes: Vec<BigRational> = hull
        .windows(2)
        .map(|w| BigRational::new(BigInt::from(w[1].1 - w[0].1), BigInt::from(w[1].0 - w[0].0)))
        .collect();
    slopes.sort();
    slopes.dedup();
    let third = BigRational::new(1.into(), 3.into());
    let predicted_orders: Vec<BigRational> = slopes.iter().filter(|s| s.is_positive()).cloned().collect();
    let admissible = predicted_orders.iter().filter(|s| **s < third).cloned().collect();
    NewtonPolygon { points, hull_vertices: hull, slopes, predicted_orders, admissible }
}

/// Largest `|sum_k a_k D_W^k f| / (sum_k |a_k| |D_W^k f| + tiny)` over the
/// points; `0` when every term vanishes.
pub fn equation_residual(eq: &WilsonDifferenceEquation, f: &FunctionHandle, points: &[Complex]) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in points {
        let mut sum = Complex::zero(x.bits());
        let mut scale = 0.0f64;
        for k in 0..=eq.order() {
            if eq.coeff_polys[k].is_empty() {
                continue;
            }
            let t = &eq.coeff_at(k, x) * &dw_n(f, x, k)?;
            scale += t.abs().to_f64();
            sum = &sum + &t;
        }
        if scale == 0.0 {
            continue;
        }
        worst = worst.max(sum.abs().to_f64() / (scale + f64::MIN_POSITIVE));
    }
    Ok(worst)
}

pub const BESSEL_MAX_TERMS: usize = 500;

#[derive(Clone, Debug)]
pub struct BesselValue {
    pub value: Complex,
    /// Ratio-test bound on the omitted terms relative to the partial sum.
    pub tail_bound: f64,
    pub terms: usize,
}

/// `I_alpha(z) = sum_k (z/2)^{2k+alpha} / (k! Gamma(k+alpha+1))` with the
/// principal power. Terms are added until three in a row fall below
/// `2^{-bits/2}` of the partial-sum scale, at most `max_terms`.
pub fn bessel_i(alpha: &Complex, z: &Complex, max_terms: usize) -> Result<BesselValue> {
    let bits = alpha.bits().min(z.bits());
    if max_terms < 10 {
        return Err(Error::Precondition(format!("bessel_i needs at least 10 terms, got {max_terms}")));
    }
    if z.is_zero() {
        let v = if alpha.is_zero() { Complex::one(bits) } else { Complex::zero(bits) };
        return Ok(BesselValue { value: v, tail_bound: 0.0, terms: 1 });
    }
    let work = bits + 16;
    let a = alpha.with_bits(work);
    let half = z.with_bits(work).scale_f64(0.5);
    let q = &half * &half;
    let lead = half.pow(&a);
    let ln_tol = -(bits as f64) / 2.0 * std::f64::consts::LN_2;
    let one = Complex::one(work);
    let mut rg = reciprocal_gamma(&a.add_f64(1.0));
    let mut pw = one.clone();
    let mut sum = Complex::zero(work);
    let mut ln_scale = f64::NEG_INFINITY;
    let mut small = 0;
    for k in 0..max_terms {
        if k > 0 {
            let shift = a.add_f64(k as f64);
            rg = if rg.is_zero() { reciprocal_gamma(&shift.add_f64(1.0)) } else { &rg / &shift };
            pw = (&pw * &q).scale(&Real::one(work).div_u64(k as u64));
        }
        let term = &rg * &pw;
        sum = &sum + &term;
        let ln_t = term.abs().ln_abs_f64();
        ln_scale = ln_scale.max(sum.abs().ln_abs_f64());
        if term.is_zero() || ln_t - ln_scale < ln_tol {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 3 {
            let kk = (k + 1) as f64;
            let ratio = q.abs().to_f64() / (kk * a.add_f64(kk + 1.0).abs().to_f64());
            let tail = if ratio < 1.0 { (ln_t - ln_scale).exp() * ratio / (1.0 - ratio) } else { f64::INFINITY };
            return Ok(BesselValue { value: (&sum * &lead).with_bits(bits), tail_bound: tail, terms: k + 1 });
        }
    }
    Err(Error::NonConvergent(format!("I_alpha series for alpha = {alpha}, z = {z} after {max_terms} terms")))
}

fn near_integer(a: &Complex) -> bool {
    let bits = a.bits();
    let tol = 2f64.powf(-(bits as f64) / 4.0);
    let re = a.re.to_f64();
    a.im.abs().to_f64() < tol && (re - re.round()).abs() < tol
}

/// `K_alpha(z) = pi / (2 sin(alpha pi)) [I_{-alpha}(z) - I_alpha(z)]`; at
/// integer `alpha` the removable singularity is replaced by the mean of the
/// values at `alpha +- h`.
pub fn bessel_k(alpha: &Complex, z: &Complex) -> Result<Complex> {
    let bits = alpha.bits().min(z.bits());
    if near_integer(alpha) {
        let h = 2f64.powf(-(bits as f64) / 4.0);
        let work = bits + bits / 2;
        let a = alpha.with_bits(work);
        let zw = z.with_bits(work);
        let up = bessel_k_generic(&a.add_f64(h), &zw)?;
        let down = bessel_k_generic(&a.add_f64(-h), &zw)?;
        return Ok((&up + &down).scale_f64(0.5).with_bits(bits));
    }
    bessel_k_generic(alpha, z)
}

fn bessel_k_generic(alpha: &Complex, z: &Complex) -> Result<Complex> {
    let bits = alpha.bits().min(z.bits());
    let pi = Real::pi(bits);
    let ip = bessel_i(&-alpha, z, BESSEL_MAX_TERMS)?.value;
    let im = bessel_i(alpha, z, BESSEL_MAX_TERMS)?.value;
    let s = alpha.scale(&pi).sin().scale_f64(2.0);
    Ok((&(&ip - &im) / &s).scale(&pi))
}

fn order_pair(x: &Complex) -> (Complex, Complex) {
    let a = (x.sqrt_w().scale_f64(2.0)).mul_i();
    let b = -&a;
    (a, b)
}

/// `I_{2i sqrt x}(2/lambda) + I_{-2i sqrt x}(2/lambda)`, a solution of
/// `D_W y = lambda y`.
pub fn eigen_f1(lambda: &Complex, x: &Complex) -> Result<Complex> {
    if lambda.is_zero() {
        return Err(Error::Precondition("lambda = 0".into()));
    }
    let bits = x.bits();
    let z = Complex::from_f64(2.0, 0.0, bits) / lambda.with_bits(bits);
    let (a, b) = order_pair(x);
    Ok(&bessel_i(&a, &z, BESSEL_MAX_TERMS)?.value + &bessel_i(&b, &z, BESSEL_MAX_TERMS)?.value)
}

/// `K_{2i sqrt x}(-2/lambda) + K_{-2i sqrt x}(-2/lambda)`.
pub fn eigen_f2(lambda: &Complex, x: &Complex) -> Result<Complex> {
    if lambda.is_zero() {
        return Err(Error::Precondition("lambda = 0".into()));
    }
    let bits = x.bits();
    let z = Complex::from_f64(-2.0, 0.0, bits) / lambda.with_bits(bits);
    let (a, _) = order_pair(x);
    // K is even in its order
    Ok(bessel_k(&a, &z)?.scale_f64(2.0))
}

pub fn eigen_f1_handle(lambda: &Complex, bits: usize) -> FunctionHandle {
    let l = lambda.with_bits(bits);
    let p = crate::numerics::PrecisionPolicy::new(bits).unwrap_or_default();
    FunctionHandle::new(format!("f1(lambda={lambda})"), p, move |x| eigen_f1(&l, x))
}

pub fn eigen_f2_handle(lambda: &Complex, bits: usize) -> FunctionHandle {
    let l = lambda.with_bits(bits);
    let p = crate::numerics::PrecisionPolicy::new(bits).unwrap_or_default();
    FunctionHandle::new(format!("f2(lambda={lambda})"), p, move |x| eigen_f2(&l, x))
}

#[derive(Clone, Debug)]
pub struct EigenRow {
    pub x: Complex,
    pub residual_f1: f64,
    pub residual_f2: f64,
    pub residual_sum: f64,
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    pub lambda: Complex,
    pub rows: Vec<EigenRow>,
}

impl EigenReport {
    pub fn max_f1(&self) -> f64 {
        self.rows.iter().map(|r| r.residual_f1).fold(0.0, f64::max)
    }

    pub fn max_f2(&self) -> f64 {
        self.rows.iter().map(|r| r.residual_f2).fold(0.0, f64::max)
    }

    pub fn max_sum(&self) -> f64 {
        self.rows.iter().map(|r| r.residual_sum).fold(0.0, f64::max)
    }
}

fn eigen_residual(h: &FunctionHandle, lambda: &Complex, x: &Complex) -> Result<f64> {
    let d = apply_dw(h, x)?;
    let lf = lambda * &h.eval(x)?;
    Ok((&d - &lf).abs().to_f64() / lf.abs().to_f64().max(f64::MIN_POSITIVE))
}

/// `|D_W f - lambda f| / |lambda f|` for `f1`, `f2` and `f1 + f2`.
pub fn eigen_check(lambda: &Complex, points: &[Complex]) -> Result<EigenReport> {
    if lambda.is_zero() {
        return Err(Error::Precondition("lambda = 0".into()));
    }
    let bits = points.first().map_or(lambda.bits(), |p| p.bits());
    let f1 = eigen_f1_handle(lambda, bits);
    let f2 = eigen_f2_handle(lambda, bits);
    let both = f1.sum(&f2);
    let rows = points
        .iter()
        .map(|x| {
            Ok(EigenRow {
                x: x.clone(),
                residual_f1: eigen_residual(&f1, lambda, x)?,
                residual_f2: eigen_residual(&f2, lambda, x)?,
                residual_sum: eigen_residual(&both, lambda, x)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EigenReport { lambda: lambda.clone(), rows })
}

/// `1/Gamma(2i sqrt x) + 1/Gamma(-2i sqrt x)`.
pub fn gamma_reciprocal_sum(x: &Complex) -> Complex {
    let (a, b) = order_pair(x);
    &reciprocal_gamma(&a) + &reciprocal_gamma(&b)
}

/// `(1/Gamma(2i sqrt x) - 1/Gamma(-2i sqrt x)) / (2i sqrt x)`, equal to 2 at
/// the origin.
pub fn gamma_reciprocal_g(x: &Complex) -> Complex {
    let bits = x.bits();
    let (a, b) = order_pair(x);
    if a.abs().ln_abs_f64() < -(bits as f64) / 4.0 * std::f64::consts::LN_2 {
        return Complex::from_f64(2.0, 0.0, bits);
    }
    &(&reciprocal_gamma(&a) - &reciprocal_gamma(&b)) / &a
}

pub fn gamma_reciprocal_sum_handle(bits: usize) -> FunctionHandle {
    let p = crate::numerics::PrecisionPolicy::new(bits).unwrap_or_default();
    FunctionHandle::new("gamma_reciprocal_sum", p, |x| Ok(gamma_reciprocal_sum(x)))
}

#[derive(Clone, Debug)]
pub struct CounterexampleRow {
    pub x: Complex,
    /// `D_W f = f (1 + 1/(4x)) - g`.
    pub first: f64,
    /// The companion identity for `D_W^2 f`.
    pub second: f64,
}

fn rel(a: &Complex, b: &Complex) -> f64 {
    let s = a.abs().to_f64().max(b.abs().to_f64()).max(f64::MIN_POSITIVE);
    (a - b).abs().to_f64() / s
}

/// Relative residuals of the two difference identities of
/// `f = 1/Gamma(2i sqrt x) + 1/Gamma(-2i sqrt x)`.
pub fn counterexample_identities(points: &[Complex]) -> Result<Vec<CounterexampleRow>> {
    points
        .iter()
        .map(|x| {
            let bits = x.bits();
            let four_x = x.scale_f64(4.0);
            if four_x.abs().to_f64() == 0.0 || four_x.add_f64(1.0).abs().to_f64() == 0.0 {
                return Err(Error::Precondition(format!("identity is singular at x = {x}")));
            }
            let h = gamma_reciprocal_sum_handle(bits);
            let f = gamma_reciprocal_sum(x);
            let g = gamma_reciprocal_g(x);
            let one = Complex::one(bits);
            let d1 = apply_dw(&h, x)?;
            let rhs1 = &(&f * &(&one + &four_x.recip())) - &g;
            let d2 = dw_n(&h, x, 2)?;
            let p = four_x.add_f64(1.0);
            let p2 = &p * &p;
            let cf = &(&one + &(&Complex::from_f64(2.0, 0.0, bits) / &p)) + &(&four_x.add_f64(-1.0) / &(&four_x * &p2));
            let cg = &Complex::from_f64(2.0, 0.0, bits) + &(&Complex::from_f64(2.0, 0.0, bits) / &p2);
            let rhs2 = &(&f * &cf) - &(&g * &cg);
            Ok(CounterexampleRow { x: x.clone(), first: rel(&d1, &rhs1), second: rel(&d2, &rhs2) })
        })
        .collect()
}

/// Least-squares fit of `y = L r^chi` in log-log coordinates. Samples with
/// nonpositive `y` are skipped; if none remain the fit is `(0, 0)`.
pub fn nu_power_law_fit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 5 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 5", samples.len())));
    }
    let pts: Vec<(f64, f64)> = samples.iter().filter(|(r, y)| *r > 0.0 && *y > 0.0).map(|(r, y)| (r.ln(), y.ln())).collect();
    if pts.is_empty() {
        return Ok((0.0, 0.0));
    }
    if pts.len() < 2 {
        return Ok((pts[0].1.exp(), 0.0));
    }
    let (slope, intercept) = least_squares(&pts);
    Ok((intercept.exp(), slope))
}

/// Slope and intercept of the least-squares line through the points.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}
