//! Wilson series: the basis `tau_k(x; x0)`, expansion of entire functions,
//! evaluation, differencing and the growth gate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::combinatorics::{binomial, factorial, maclaurin_to_wilson, pochhammer_complex};
use crate::diffeq;
use crate::error::{Error, Result};
use crate::numerics::{
    lattice_point, max_modulus, rational_to_f64, Complex, PrecisionPolicy, Real,
};
use crate::operators::FunctionHandle;

/// Built-in closed-form entire functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `sum_k x^k / (k!)^gamma`, of order `1/gamma`.
    FactorialPower { gamma: BigRational },
    Polynomial(Vec<BigRational>),
    /// `I_{2i sqrt x}(2/lambda) + I_{-2i sqrt x}(2/lambda)`.
    BesselEigen1 { lambda: (BigRational, BigRational) },
    /// `K_{2i sqrt x}(-2/lambda) + K_{-2i sqrt x}(-2/lambda)`.
    BesselEigen2 { lambda: (BigRational, BigRational) },
    /// `1/Gamma(2i sqrt x) + 1/Gamma(-2i sqrt x)`.
    GammaReciprocalSum,
}

/// An entire function given by Maclaurin coefficients, Wilson coefficients
/// or a built-in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum EntireFunctionSpec {
    /// Finite Maclaurin coefficients; the optional tail bound records how far
    /// the truncation is trusted.
    Maclaurin { coeffs: Vec<BigRational>, tail_bound: Option<BigRational> },
    Wilson { x0: (BigRational, BigRational), coeffs: Vec<BigRational> },
    Builtin(Builtin),
}

fn complex_of(p: &(BigRational, BigRational), bits: usize) -> Complex {
    Complex::new(Real::from_rational(&p.0, bits), Real::from_rational(&p.1, bits))
}

fn horner(coeffs: &[BigRational], x: &Complex) -> Complex {
    let bits = x.bits();
    let mut acc = Complex::zero(bits);
    for c in coeffs.iter().rev() {
        acc = (&acc * x).add_real(&Real::from_rational(c, bits));
    }
    acc
}

/// `sum_k x^k / (k!)^gamma`, summed until the terms are past their peak and
/// below `2^-bits` of the largest term.
pub fn factorial_power_eval(gamma: &BigRational, x: &Complex) -> Complex {
    let bits = x.bits();
    let work = bits + 32;
    let xw = x.with_bits(work);
    let int_gamma = if gamma.is_integer() { gamma.to_integer().to_u32() } else { None };
    let g = Real::from_rational(gamma, work);
    let ln_x = xw.abs().ln_abs_f64();
    let cut = -((bits + 8) as f64) * std::f64::consts::LN_2;
    let mut term = Complex::one(work);
    let mut sum = Complex::one(work);
    let mut ln_max = 0.0f64;
    let mut k: u64 = 0;
    loop {
        k += 1;
        let kg = match int_gamma {
            Some(e) if (k as f64).powi(e as i32) < 9.0e15 => Real::from_u64(k.pow(e), work),
            Some(e) => Real::from_bigint(&BigInt::from(k).pow(e), work),
            None => Real::from_u64(k, work).pow(&g),
        };
        term = (&term * &xw).scale(&(&Real::one(work) / &kg));
        sum = &sum + &term;
        let ln_t = term.abs().ln_abs_f64();
        ln_max = ln_max.max(ln_t);
        let past_peak = (k as f64).ln() * rational_to_f64(gamma) > ln_x + 1.0;
        if past_peak && ln_t - ln_max < cut {
            break;
        }
        if term.is_zero() && past_peak {
            break;
        }
    }
    sum.with_bits(bits)
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Builtin::FactorialPower { gamma } => format!("factorial_power({})", crate::combinatorics::rational_string(gamma)),
            Builtin::Polynomial(c) => format!("polynomial(degree {})", c.len().saturating_sub(1)),
            Builtin::BesselEigen1 { .. } => "bessel_eigen_1".into(),
            Builtin::BesselEigen2 { .. } => "bessel_eigen_2".into(),
            Builtin::GammaReciprocalSum => "gamma_reciprocal_sum".into(),
        }
    }
}

impl EntireFunctionSpec {
    pub fn factorial_power(gamma: i64) -> Self {
        EntireFunctionSpec::Builtin(Builtin::FactorialPower { gamma: BigRational::from_integer(gamma.into()) })
    }

    pub fn polynomial(coeffs: Vec<BigRational>) -> Self {
        EntireFunctionSpec::Builtin(Builtin::Polynomial(coeffs))
    }

    pub fn label(&self) -> String {
        match self {
            EntireFunctionSpec::Maclaurin { coeffs, .. } => format!("maclaurin({} terms)", coeffs.len()),
            EntireFunctionSpec::Wilson { coeffs, .. } => format!("wilson({} terms)", coeffs.len()),
            EntireFunctionSpec::Builtin(b) => b.name(),
        }
    }

    /// Exact Maclaurin coefficients when the function is a polynomial.
    pub fn finite_maclaurin(&self) -> Option<Vec<BigRational>> {
        match self {
            EntireFunctionSpec::Maclaurin { coeffs, .. } => Some(coeffs.clone()),
            EntireFunctionSpec::Builtin(Builtin::Polynomial(c)) => Some(c.clone()),
            EntireFunctionSpec::Wilson { x0, coeffs } if x0.0.is_zero() && x0.1.is_zero() => {
                Some(crate::combinatorics::wilson_to_maclaurin(coeffs))
            }
            _ => None,
        }
    }

    /// Degree when the function is a polynomial; `tau_k` has degree `k`, so a
    /// Wilson sum has the degree of its last nonzero coefficient.
    pub fn polynomial_degree(&self) -> Option<usize> {
        let coeffs = match self {
            EntireFunctionSpec::Wilson { coeffs, .. } => coeffs.clone(),
            other => other.finite_maclaurin()?,
        };
        Some(coeffs.iter().rposition(|q| !q.is_zero()).unwrap_or(0))
    }

    /// Order of growth when known in closed form.
    pub fn known_order(&self) -> Option<f64> {
        match self {
            EntireFunctionSpec::Builtin(Builtin::FactorialPower { gamma }) => Some(1.0 / rational_to_f64(gamma)),
            EntireFunctionSpec::Builtin(Builtin::BesselEigen1 { .. })
            | EntireFunctionSpec::Builtin(Builtin::BesselEigen2 { .. })
            | EntireFunctionSpec::Builtin(Builtin::GammaReciprocalSum) => Some(0.5),
            _ => Some(0.0),
        }
    }

    /// Whether the function is of order below 1/3, as the asymptotic
    /// checks require.
    pub fn admissible_for_scan(&self) -> bool {
        self.known_order().is_some_and(|s| s < 1.0 / 3.0)
    }

    /// Non-empty when the function is expected to violate the growth
    /// condition under which the Wilson expansion is unique.
    pub fn gate_warning(&self) -> Option<String> {
        match self {
            EntireFunctionSpec::Builtin(Builtin::GammaReciprocalSum) => {
                Some("gamma_reciprocal_sum has order 1/2 and infinite type; it is outside the growth gate".into())
            }
            EntireFunctionSpec::Builtin(Builtin::BesselEigen1 { .. })
            | EntireFunctionSpec::Builtin(Builtin::BesselEigen2 { .. }) => {
                Some(format!("{} has order 1/2; its expansion may not be unique", self.label()))
            }
            _ => None,
        }
    }

    pub fn eval(&self, x: &Complex) -> Result<Complex> {
        let bits = x.bits();
        let v = match self {
            EntireFunctionSpec::Maclaurin { coeffs, .. } => horner(coeffs, &x.with_bits(bits + 32)).with_bits(bits),
            EntireFunctionSpec::Builtin(Builtin::Polynomial(c)) => horner(c, &x.with_bits(bits + 32)).with_bits(bits),
            EntireFunctionSpec::Wilson { x0, coeffs } => {
                let x0 = complex_of(x0, bits + 32);
                let z0 = x0.sqrt_w();
                let xw = x.with_bits(bits + 32);
                let mut tau = Complex::one(bits + 32);
                let mut acc = Complex::zero(bits + 32);
                for (k, a) in coeffs.iter().enumerate() {
                    if k > 0 {
                        tau = &tau * &(&lattice_point(&z0, 2 * (k as i64 - 1)) - &xw);
                    }
                    acc = &acc + &tau.scale(&Real::from_rational(a, bits + 32));
                }
                acc.with_bits(bits)
            }
            EntireFunctionSpec::Builtin(Builtin::FactorialPower { gamma }) => factorial_power_eval(gamma, x),
            EntireFunctionSpec::Builtin(Builtin::BesselEigen1 { lambda }) => {
                diffeq::eigen_f1(&complex_of(lambda, bits), x)?
            }
            EntireFunctionSpec::Builtin(Builtin::BesselEigen2 { lambda }) => {
                diffeq::eigen_f2(&complex_of(lambda, bits), x)?
            }
            EntireFunctionSpec::Builtin(Builtin::GammaReciprocalSum) => diffeq::gamma_reciprocal_sum(x),
        };
        if !v.is_finite() {
            return Err(Error::Evaluation { point: format!("{x}"), reason: format!("{} is not finite", self.label()) });
        }
        Ok(v)
    }

    /// The function as a handle evaluated at `precision`.
    pub fn handle(&self, precision: PrecisionPolicy) -> FunctionHandle {
        let spec = self.clone();
        let bits = precision.bits();
        FunctionHandle::new(self.label(), precision, move |x| spec.eval(&x.with_bits(bits)))
    }
}

/// `tau_k(x; x0) = prod_{j<k} ((z0 + j i)^2 - x)` with `z0 = sqrt_w(x0)`.
pub fn tau_eval(k: usize, x: &Complex, x0: &Complex) -> Complex {
    tau_eval_root(k, x, &x0.sqrt_w())
}

pub fn tau_eval_root(k: usize, x: &Complex, z0: &Complex) -> Complex {
    let mut acc = Complex::one(x.bits().min(z0.bits()));
    for j in 0..k {
        acc = &acc * &(&lattice_point(z0, 2 * j as i64) - x);
    }
    acc
}

/// Coefficients `a_k` of `f = sum_k a_k tau_k(.; x0)`.
#[derive(Clone, Debug)]
pub struct WilsonSeries {
    x0: Complex,
    z0: Complex,
    coeffs: Vec<Complex>,
    precision: PrecisionPolicy,
    finite: bool,
    exact: Option<Vec<BigRational>>,
}

impl WilsonSeries {
    /// `finite` declares that all coefficients past the given ones vanish.
    pub fn new(x0: Complex, coeffs: Vec<Complex>, precision: PrecisionPolicy, finite: bool) -> Result<Self> {
        let z0 = x0.sqrt_w();
        let two_z0_i = (&z0 + &z0).mul_i();
        if two_z0_i.im.is_zero() && !two_z0_i.re.is_negative() {
            if let Some(n) = two_z0_i.re.round_to_bigint() {
                if Real::from_bigint(&n, two_z0_i.bits()) == two_z0_i.re && !n.is_zero() {
                    return Err(Error::Precondition(format!("2 z0 i = {n} is a positive integer")));
                }
            }
        }
        Ok(Self { x0, z0, coeffs, precision, finite, exact: None })
    }

    /// Exact rational coefficients at `x0 = 0`.
    pub fn from_exact(coeffs: Vec<BigRational>, precision: PrecisionPolicy, finite: bool) -> Self {
        let bits = precision.bits();
        let c = coeffs.iter().map(|q| Complex::from_rational(q, bits)).collect();
        Self { x0: Complex::zero(bits), z0: Complex::zero(bits), coeffs: c, precision, finite, exact: Some(coeffs) }
    }

    pub fn x0(&self) -> &Complex {
        &self.x0
    }

    pub fn z0(&self) -> &Complex {
        &self.z0
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn precision(&self) -> PrecisionPolicy {
        self.precision
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn at_origin(&self) -> bool {
        self.x0.is_zero()
    }

    /// Same coefficients rounded to another precision.
    pub fn with_precision(&self, precision: PrecisionPolicy) -> Self {
        let mut s = self.clone();
        s.precision = precision;
        s.coeffs = self.coeffs.iter().map(|c| c.with_bits(precision.bits())).collect();
        s.x0 = self.x0.with_bits(precision.bits());
        s.z0 = self.z0.with_bits(precision.bits());
        s
    }

    /// Keeps the first `n` coefficients; the result is no longer finite
    /// unless everything dropped was zero.
    pub fn truncated(&self, n: usize) -> Self {
        let mut s = self.clone();
        let dropped_nonzero = self.coeffs.iter().skip(n).any(|c| !c.is_zero());
        s.coeffs.truncate(n);
        if let Some(e) = s.exact.as_mut() {
            e.truncate(n);
        }
        s.finite = self.finite && !dropped_nonzero;
        s
    }
}

/// Precision used by the interpolation formula for `n_max` coefficients.
pub fn expansion_bits(n_max: usize, policy: PrecisionPolicy) -> usize {
    let n = n_max.max(2) as f64;
    let sched = 64 + (4.0 * n_max as f64 * n.log2()).ceil() as usize;
    policy.bits().max(sched)
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub series: WilsonSeries,
    pub working_bits: usize,
    pub warnings: Vec<String>,
}

/// Wilson coefficients `a_0..a_{n_max}` of `f` at `x0`.
///
/// At `x0 = 0` a polynomial is converted exactly through the central
/// factorial numbers. Otherwise
/// `a_n = (1/n!) sum_j (-1)^{n-j} C(n,j) f(x0^{+(2j)}) / ((-2z0i+j)_j (-2z0i+2j+1)_{n-j})`
/// is evaluated at the precision of [`expansion_bits`].
pub fn expand_wilson(f: &EntireFunctionSpec, x0: &Complex, n_max: usize, policy: PrecisionPolicy) -> Result<Expansion> {
    let mut warnings: Vec<String> = f.gate_warning().into_iter().collect();
    if x0.is_zero() {
        if let Some(b) = f.finite_maclaurin() {
            let mut a = maclaurin_to_wilson(&b);
            let degree = a.iter().rposition(|q| !q.is_zero()).map_or(0, |d| d + 1);
            let finite = degree <= n_max + 1;
            a.truncate(degree.max(1).min(n_max + 1));
            if a.is_empty() {
                a.push(BigRational::zero());
            }
            return Ok(Expansion { series: WilsonSeries::from_exact(a, policy, finite), working_bits: policy.bits(), warnings });
        }
    }
    let bits = expansion_bits(n_max, policy);
    let x0w = x0.with_bits(bits);
    let z0 = x0w.sqrt_w();
    let base = (&z0 + &z0).mul_i().scale_f64(-1.0);
    let values: Vec<Complex> = (0..=n_max)
        .into_par_iter()
        .map(|j| f.eval(&lattice_point(&z0, 2 * j as i64)))
        .collect::<Result<_>>()?;
    let tol = 2f64.powf(-(bits as f64) / 2.0);
    let check = |v: &Complex, index: usize| -> Result<()> {
        if v.abs().to_f64() < tol {
            Err(Error::DegenerateDenominator { index })
        } else {
            Ok(())
        }
    };
    // dens[j] = (-2z0i + j)_j (-2z0i + 2j + 1)_{n-j} for the current n
    let mut dens: Vec<Complex> = Vec::with_capacity(n_max + 1);
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        for (j, d) in dens.iter_mut().enumerate() {
            let factor = base.add_f64((j + n) as f64);
            check(&factor, j)?;
            *d = &*d * &factor;
        }
        let first = base.add_f64(n as f64);
        for t in 0..n {
            check(&first.add_f64(t as f64), n)?;
        }
        dens.push(pochhammer_complex(&first, n as u64));
        let mut acc = Complex::zero(bits);
        for j in 0..=n {
            let c = Real::from_bigint(&binomial(n as u64, j as u64), bits);
            let t = (&values[j] / &dens[j]).scale(&c);
            acc = if (n - j) % 2 == 1 { &acc - &t } else { &acc + &t };
        }
        let nf = Real::from_bigint(&factorial(n as u64), bits);
        coeffs.push(acc.scale(&(&Real::one(bits) / &nf)));
    }
    let degree = f.polynomial_degree().filter(|d| *d <= n_max);
    if let Some(d) = degree {
        coeffs.truncate(d + 1);
    }
    let series = WilsonSeries::new(x0w, coeffs, policy, degree.is_some())?;
    if !f.admissible_for_scan() && warnings.is_empty() {
        warnings.push(format!("{} is not known to be of order below 1/3", f.label()));
    }
    Ok(Expansion { series, working_bits: bits, warnings })
}

#[derive(Clone, Debug)]
pub struct WilsonEval {
    pub value: Complex,
    /// Largest of the last three term magnitudes relative to the running
    /// partial-sum scale; zero for finite series.
    pub tail: f64,
    pub terms_used: usize,
}

/// Partial sum `sum_k a_k tau_k(x; x0)` until three consecutive terms are
/// below `tail_tol` times the running partial-sum scale.
pub fn eval_wilson(s: &WilsonSeries, x: &Complex, tail_tol: f64) -> Result<WilsonEval> {
    let bits = s.coeffs.first().map_or(x.bits(), |c| c.bits()).min(x.bits()).max(s.precision.bits());
    let x = x.with_bits(bits);
    let mut tau = Complex::one(bits);
    let mut acc = Complex::zero(bits);
    let mut ln_scale = f64::NEG_INFINITY;
    let mut small = 0usize;
    let mut recent = [f64::NEG_INFINITY; 3];
    let ln_tol = tail_tol.ln();
    for (k, a) in s.coeffs.iter().enumerate() {
        if k > 0 {
            tau = &tau * &(&lattice_point(&s.z0, 2 * (k as i64 - 1)) - &x);
        }
        let term = a * &tau;
        acc = &acc + &term;
        let ln_t = term.abs().ln_abs_f64();
        ln_scale = ln_scale.max(acc.abs().ln_abs_f64());
        recent[k % 3] = ln_t;
        if ln_t - ln_scale < ln_tol || term.is_zero() {
            small += 1;
        } else {
            small = 0;
        }
        if !s.finite && small >= 3 {
            let tail = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ln_scale;
            return Ok(WilsonEval { value: acc.with_bits(s.precision.bits()), tail: tail.exp(), terms_used: k + 1 });
        }
    }
    if s.finite {
        return Ok(WilsonEval { value: acc.with_bits(s.precision.bits()), tail: 0.0, terms_used: s.coeffs.len() });
    }
    let last = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Err(Error::Truncation { index: s.coeffs.len(), last_term: last.exp() })
}

/// Wilson series of `D_W f`: base point `x0+` and `a'_{k-1} = -k a_k`.
pub fn dw_of_series(s: &WilsonSeries) -> WilsonSeries {
    let bits = s.z0.bits();
    let z0 = Complex::new(s.z0.re.clone(), s.z0.im.add_f64(0.5));
    let x0 = &z0 * &z0;
    let coeffs: Vec<Complex> = if s.coeffs.len() <= 1 {
        vec![Complex::zero(bits)]
    } else {
        s.coeffs.iter().enumerate().skip(1).map(|(k, a)| a.scale_f64(-(k as f64))).collect()
    };
    WilsonSeries { x0, z0, coeffs, precision: s.precision, finite: s.finite, exact: None }
}

#[derive(Clone, Debug)]
pub struct GateReport {
    /// `(r, ln+ M(r) / sqrt r)` per radius.
    pub values: Vec<(f64, f64)>,
    pub top_decade_max: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Samples `ln+ M(r;f)/sqrt(r)` and compares the running maximum over the
/// top decade with `2 ln 2` (pass below 90% of it). Advisory only: a
/// finite grid cannot certify a limsup.
pub fn growth_gate(f: &EntireFunctionSpec, radii: &[f64], precision: PrecisionPolicy) -> Result<GateReport> {
    if radii.is_empty() {
        return Err(Error::InsufficientData("no radii".into()));
    }
    let h = f.handle(precision);
    let values: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let m = max_modulus(|x| h.eval(x), &Real::from_f64(r, precision.bits()), 256)?;
            Ok((r, m.value.ln_abs_f64().max(0.0) / r.sqrt()))
        })
        .collect::<Result<_>>()?;
    let r_top = radii.iter().cloned().fold(f64::MIN, f64::max);
    let top_decade_max = values.iter().filter(|(r, _)| *r >= r_top / 10.0).map(|v| v.1).fold(0.0, f64::max);
    let threshold = 2.0 * std::f64::consts::LN_2;
    Ok(GateReport { values, top_decade_max, threshold, pass: top_decade_max < 0.9 * threshold })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Converges,
    Diverges,
    Inconclusive,
}

/// Cauchy-style verdict on the partial sums at `test_point`. A Wilson series
/// either converges nowhere off its nodes or locally uniformly everywhere, so
/// one generic point decides.
pub fn partial_sum_convergence_probe(coeffs: &[Complex], x0: &Complex, test_point: &Complex, finite: bool) -> Convergence {
    if finite {
        return Convergence::Converges;
    }
    let bits = test_point.bits();
    let z0 = x0.sqrt_w();
    let mut tau = Complex::one(bits);
    let mut acc = Complex::zero(bits);
    let mut ln_terms = Vec::with_capacity(coeffs.len());
    let mut ln_scale = f64::NEG_INFINITY;
    for (k, a) in coeffs.iter().enumerate() {
        if k > 0 {
            tau = &tau * &(&lattice_point(&z0, 2 * (k as i64 - 1)) - test_point);
        }
        let t = a * &tau;
        acc = &acc + &t;
        ln_terms.push(t.abs().ln_abs_f64());
        ln_scale = ln_scale.max(acc.abs().ln_abs_f64());
    }
    let n = ln_terms.len();
    if n < 8 {
        return Convergence::Inconclusive;
    }
    let tail = &ln_terms[3 * n / 4..];
    let finite_tail: Vec<f64> = tail.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite_tail.is_empty() {
        return Convergence::Converges;
    }
    let first = finite_tail[0];
    let last = *finite_tail.last().unwrap();
    if last > first && last > ln_scale - 1.0 {
        return Convergence::Diverges;
    }
    if last < first && last - ln_scale < -30.0 {
        return Convergence::Converges;
    }
    Convergence::Inconclusive
}

/// `((-1)^n / n!) D_W^n f(x0^{+(n)})`, the coefficient identity used as an
/// independent route to `a_n`.
pub fn coefficient_via_differences(f: &FunctionHandle, x0: &Complex, n: usize) -> Result<Complex> {
    let bits = x0.bits();
    let z0 = x0.sqrt_w();
    let at = lattice_point(&z0, n as i64);
    let d = crate::operators::dw_n(f, &at, n)?;
    let nf = Real::from_bigint(&factorial(n as u64), bits);
    let v = d.scale(&(&Real::one(bits) / &nf));
    Ok(if n % 2 == 1 { -v } else { v })
}

/// Wilson coefficients at 0 from Maclaurin coefficients through the
/// truncated basis-change sum `a_n = sum_{k>=n} (-1)^k T(k,n) b_k`.
pub fn wilson_from_maclaurin_truncated(b: &[Complex], n_max: usize) -> Vec<Complex> {
    let k_max = b.len().saturating_sub(1);
    let t = crate::combinatorics::central_factorial_table(k_max);
    let bits = b.first().map_or(128, |c| c.bits());
    (0..=n_max)
        .map(|n| {
            let mut acc = Complex::zero(bits);
            for k in n..=k_max {
                let c = Real::from_bigint(&t[k][n], bits);
                let term = b[k].scale(&c);
                acc = if k % 2 == 1 { &acc - &term } else { &acc + &term };
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: usize = 128;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, B)
    }

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(v: &[i64]) -> EntireFunctionSpec {
        EntireFunctionSpec::polynomial(v.iter().map(|&x| rational(x, 1)).collect())
    }

    #[test]
    fn tau_examples() {
        let zero = c(0.0, 0.0);
        let x = c(2.0, -3.0);
        assert!(tau_eval(1, &x, &zero).rel_diff(&-&x, 1.0) < 1e-35);
        let want = &x * &x.add_f64(1.0);
        assert!(tau_eval(2, &x, &zero).rel_diff(&want, 1.0) < 1e-35);
        let x0 = c(0.3, 0.9);
        for k in 1..5 {
            assert!(tau_eval(k, &x0, &x0).abs().to_f64() < 1e-30);
        }
        let r = 7.0;
        let t = tau_eval(4, &c(r, 0.0), &zero).abs().to_f64();
        assert!((t - r * (r + 1.0) * (r + 4.0) * (r + 9.0)).abs() < 1e-20);
    }

    #[test]
    fn expand_square_exact_and_numeric() {
        let sq = poly(&[0, 0, 1]);
        let e = expand_wilson(&sq, &c(0.0, 0.0), 6, PrecisionPolicy::default()).unwrap();
        assert_eq!(e.series.exact().unwrap(), &[rational(0, 1), rational(1, 1), rational(1, 1)]);
        let f = EntireFunctionSpec::Builtin(Builtin::FactorialPower { gamma: rational(4, 1) });
        let e = expand_wilson(&f, &c(0.0, 0.0), 3, PrecisionPolicy::default()).unwrap();
        assert!(e.series.exact().is_none());
        assert_eq!(e.series.len(), 4);
    }

    #[test]
    fn expand_constant_and_evaluate() {
        let k = poly(&[5]);
        let e = expand_wilson(&k, &c(0.0, 0.0), 4, PrecisionPolicy::default()).unwrap();
        assert_eq!(e.series.exact().unwrap(), &[rational(5, 1)]);
        let v = eval_wilson(&e.series, &c(3.0, 4.0), 1e-30).unwrap();
        assert!(v.value.rel_diff(&c(5.0, 0.0), 1.0) < 1e-35);
        let sq = poly(&[0, 0, 1]);
        let e = expand_wilson(&sq, &c(0.0, 0.0), 4, PrecisionPolicy::default()).unwrap();
        let v = eval_wilson(&e.series, &c(7.0, 2.0), 1e-30).unwrap();
        assert!(v.value.rel_diff(&c(45.0, 28.0), 1.0) < 1e-35);
    }

    #[test]
    fn differenced_series_of_square() {
        let sq = poly(&[0, 0, 1]);
        let s = expand_wilson(&sq, &c(0.0, 0.0), 4, PrecisionPolicy::default()).unwrap().series;
        let d = dw_of_series(&s);
        assert!(d.x0().rel_diff(&c(-0.25, 0.0), 1.0) < 1e-35);
        let got: Vec<f64> = d.coeffs().iter().map(|a| a.re.to_f64()).collect();
        assert_eq!(got, vec![-1.0, -2.0]);
        for x in [c(1.0, 2.0), c(-3.0, 0.5)] {
            let v = eval_wilson(&d, &x, 1e-30).unwrap().value;
            assert!(v.rel_diff(&x.scale_f64(2.0).add_f64(-0.5), 1.0) < 1e-30);
        }
        let k = expand_wilson(&poly(&[3]), &c(0.0, 0.0), 2, PrecisionPolicy::default()).unwrap().series;
        assert!(dw_of_series(&k).coeffs().iter().all(|a| a.is_zero()));
    }

    #[test]
    fn factorial_power_matches_direct_sum() {
        let x = c(10.0, 0.0);
        let v = factorial_power_eval(&rational(4, 1), &x).re.to_f64();
        let mut direct = 0.0;
        let mut fact = 1.0f64;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            direct += 10f64.powi(k) / fact.powi(4);
        }
        assert!((v - direct).abs() / direct < 1e-14);
    }

    #[test]
    fn probe_verdicts() {
        let zero = c(0.0, 0.0);
        let fact: Vec<Complex> = (0..40u64).map(|k| Complex::from_real(Real::from_bigint(&factorial(k), B))).collect();
        assert_eq!(partial_sum_convergence_probe(&fact, &zero, &c(1.0, 0.0), false), Convergence::Diverges);
        let sq = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(partial_sum_convergence_probe(&sq, &zero, &c(1.0, 0.0), true), Convergence::Converges);
    }

    #[test]
    fn bits_schedule() {
        let p = PrecisionPolicy::default();
        assert_eq!(expansion_bits(1, p), 128);
        assert_eq!(expansion_bits(120, p), 64 + (480.0 * 120f64.log2()).ceil() as usize);
    }

    #[test]
    fn gate_on_polynomial_passes() {
        let g = growth_gate(&poly(&[1, 2, 3]), &[10.0, 100.0, 1000.0], PrecisionPolicy::default()).unwrap();
        assert!(g.pass);
    }
}
