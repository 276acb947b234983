//! The Wilson divided-difference operator `D_W`, the averaging operator
//! `A_W`, their iterates, and the product/quotient/commutator/Leibniz rules.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::combinatorics::{binomial, leibniz_c, pochhammer_complex};
use crate::error::{Error, Result};
use crate::numerics::{lattice_point, Complex, PrecisionPolicy, Real};

type EvalFn = dyn Fn(&Complex) -> Result<Complex> + Send + Sync;

/// A black-box complex function with a label and a precision hint.
#[derive(Clone)]
pub struct FunctionHandle {
    eval: Arc<EvalFn>,
    label: String,
    precision: PrecisionPolicy,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionHandle({}, {} bits)", self.label, self.precision.bits())
    }
}

impl FunctionHandle {
    pub fn new<F>(label: impl Into<String>, precision: PrecisionPolicy, f: F) -> Self
    where
        F: Fn(&Complex) -> Result<Complex> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), label: label.into(), precision }
    }

    pub fn eval(&self, x: &Complex) -> Result<Complex> {
        let v = (self.eval)(x)?;
        if !v.is_finite() {
            return Err(Error::Evaluation { point: format!("{x}"), reason: format!("{} is not finite", self.label) });
        }
        Ok(v)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn precision(&self) -> PrecisionPolicy {
        self.precision
    }

    pub fn product(&self, other: &FunctionHandle) -> FunctionHandle {
        let (f, g) = (self.clone(), other.clone());
        let p = self.precision.min(other.precision);
        FunctionHandle::new(format!("({})*({})", self.label, other.label), p, move |x| Ok(&f.eval(x)? * &g.eval(x)?))
    }

    pub fn quotient(&self, other: &FunctionHandle) -> FunctionHandle {
        let (f, g) = (self.clone(), other.clone());
        let p = self.precision.min(other.precision);
        FunctionHandle::new(format!("({})/({})", self.label, other.label), p, move |x| {
            let d = g.eval(x)?;
            if d.is_zero() {
                return Err(Error::ZeroDenominator(format!("{} at {x}", g.label)));
            }
            Ok(&f.eval(x)? / &d)
        })
    }

    pub fn sum(&self, other: &FunctionHandle) -> FunctionHandle {
        let (f, g) = (self.clone(), other.clone());
        let p = self.precision.min(other.precision);
        FunctionHandle::new(format!("({})+({})", self.label, other.label), p, move |x| Ok(&f.eval(x)? + &g.eval(x)?))
    }

    /// The function `x -> (A_W f)(x)` as a new handle.
    pub fn averaged(&self) -> FunctionHandle {
        let f = self.clone();
        FunctionHandle::new(format!("A_W({})", self.label), self.precision, move |x| apply_aw(&f, x))
    }

    /// The function `x -> (D_W f)(x)` as a new handle.
    pub fn differenced(&self) -> FunctionHandle {
        let f = self.clone();
        FunctionHandle::new(format!("D_W({})", self.label), self.precision, move |x| apply_dw(&f, x))
    }
}

/// A single operator letter in a word such as `A_W^2 D_W^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    A,
    D,
}

fn origin_threshold(bits: usize) -> f64 {
    2f64.powf(-(bits as f64) / 2.0)
}

fn is_near_zero(z: &Complex, bits: usize) -> bool {
    z.abs().ln_abs_f64() < origin_threshold(bits).ln()
}

/// `(A_W f)(x) = (f(x+) + f(x-)) / 2`.
pub fn apply_aw(f: &FunctionHandle, x: &Complex) -> Result<Complex> {
    apply_aw_with_root(f, &x.sqrt_w())
}

/// `A_W` using an explicit square root `w` of `x`.
pub fn apply_aw_with_root(f: &FunctionHandle, w: &Complex) -> Result<Complex> {
    let p = f.eval(&lattice_point(w, 1))?;
    let m = f.eval(&lattice_point(w, -1))?;
    Ok((&p + &m).scale_f64(0.5))
}

/// `(D_W f)(x) = (f(x+) - f(x-)) / (2 i sqrt(x))`; near the origin the
/// limit `f'(-1/4)` from a five-point stencil.
pub fn apply_dw(f: &FunctionHandle, x: &Complex) -> Result<Complex> {
    apply_dw_with_root(f, &x.sqrt_w())
}

/// `D_W` using an explicit square root `w` of `x`.
pub fn apply_dw_with_root(f: &FunctionHandle, w: &Complex) -> Result<Complex> {
    let bits = w.bits();
    if is_near_zero(&(w * w), bits) {
        return derivative_at_quarter(f, bits);
    }
    let p = f.eval(&lattice_point(w, 1))?;
    let m = f.eval(&lattice_point(w, -1))?;
    Ok(&(&p - &m) / &(w + w).mul_i())
}

fn derivative_at_quarter(f: &FunctionHandle, bits: usize) -> Result<Complex> {
    let h = Real::from_f64(2f64.powf(-(bits as f64) / 3.0), bits);
    let a = Complex::from_f64(-0.25, 0.0, bits);
    let at = |k: f64| f.eval(&a.add_real(&h.mul_f64(k)));
    let num = &(&(&at(-2.0)? - &at(2.0)?) + &at(1.0)?.scale_f64(8.0)) - &at(-1.0)?.scale_f64(8.0);
    let d = num.scale(&(&Real::one(bits) / &h.mul_f64(12.0)));
    if !d.is_finite() {
        return Err(Error::Evaluation { point: "-1/4".into(), reason: "derivative estimate is not finite".into() });
    }
    Ok(d)
}

/// Evaluates a word of operators at `x`. The word is written outermost
/// first, so `[A, D, D]` is `A_W D_W^2 f`.
///
/// The word is evaluated on the lattice `w + m i/2`, `w = sqrt_w(x)`, one
/// operator at a time from the innermost outwards, with each function value
/// computed once.
pub fn apply_word(f: &FunctionHandle, x: &Complex, word: &[Op]) -> Result<Complex> {
    let w = x.sqrt_w();
    apply_word_with_root(f, &w, word)
}

pub fn apply_word_with_root(f: &FunctionHandle, w: &Complex, word: &[Op]) -> Result<Complex> {
    let len = word.len() as i64;
    if len == 0 {
        return f.eval(&(w * w));
    }
    if len == 1 {
        return match word[0] {
            Op::A => apply_aw_with_root(f, w),
            Op::D => apply_dw_with_root(f, w),
        };
    }
    let bits = w.bits();
    let half_i = |m: i64| Complex::new(w.re.clone(), &w.im + &Real::from_f64(m as f64 * 0.5, bits));
    let mut level: HashMap<i64, Complex> = HashMap::new();
    let mut m = -len;
    while m <= len {
        level.insert(m, f.eval(&lattice_point(w, m))?);
        m += 2;
    }
    for (depth, op) in word.iter().rev().enumerate() {
        let reach = len - depth as i64 - 1;
        let mut next = HashMap::with_capacity(reach as usize + 1);
        let mut m = -reach;
        while m <= reach {
            let up = &level[&(m + 1)];
            let down = &level[&(m - 1)];
            let v = match op {
                Op::A => (up + down).scale_f64(0.5),
                Op::D => {
                    let wm = half_i(m);
                    if is_near_zero(&wm, bits / 2) {
                        return Err(Error::DegenerateNode { m, x: format!("{}", w * w) });
                    }
                    &(up - down) / &(&wm + &wm).mul_i()
                }
            };
            next.insert(m, v);
            m += 2;
        }
        level = next;
    }
    Ok(level.remove(&0).expect("word evaluation reaches m = 0"))
}

fn word(a: usize, d: usize) -> Vec<Op> {
    let mut v = vec![Op::A; a];
    v.extend(std::iter::repeat(Op::D).take(d));
    v
}

/// `D_W^n f(x)` by nested divided differences.
pub fn apply_dw_iterated(f: &FunctionHandle, x: &Complex, n: usize) -> Result<Complex> {
    apply_word(f, x, &word(0, n))
}

/// `D_W^n f(x0)` by the single interpolation sum
/// `(-1)^n sum_j C(n,j) f(x0^{+(2j-n)}) / ((-2 z0 i - n + j)_j (2 z0 i - j)_{n-j})`.
pub fn cooper_dw_n(f: &FunctionHandle, x0: &Complex, n: usize) -> Result<Complex> {
    let bits = x0.bits();
    let z0 = x0.sqrt_w();
    if n == 0 {
        return f.eval(x0);
    }
    let two_z0_i = (&z0 + &z0).mul_i();
    let tol = origin_threshold(bits);
    let mut acc = Complex::zero(bits);
    for j in 0..=n {
        let a = (-&two_z0_i).add_f64(j as f64 - n as f64);
        let b = two_z0_i.add_f64(-(j as f64));
        for (base, len) in [(&a, j), (&b, n - j)] {
            for t in 0..len {
                if base.add_f64(t as f64).abs().to_f64() < tol {
                    return Err(Error::DegenerateDenominator { index: j });
                }
            }
        }
        let den = &pochhammer_complex(&a, j as u64) * &pochhammer_complex(&b, (n - j) as u64);
        let c = Real::from_bigint(&binomial(n as u64, j as u64), bits);
        let v = f.eval(&lattice_point(&z0, 2 * j as i64 - n as i64))?;
        acc = &acc + &(&v / &den).scale(&c);
    }
    Ok(if n % 2 == 1 { -acc } else { acc })
}

/// `D_W^n f(x)` by the interpolation sum, falling back to nested differences
/// when a Pochhammer factor degenerates.
pub fn dw_n(f: &FunctionHandle, x: &Complex, n: usize) -> Result<Complex> {
    match cooper_dw_n(f, x, n) {
        Err(Error::DegenerateDenominator { .. }) => apply_dw_iterated(f, x, n),
        other => other,
    }
}

/// Right-hand side of the Leibniz rule
/// `sum_k C(n,k) sum_j binom(n-k,j) A^{n-k-j} D^{j+k} f * A^j D^{n-j} g`.
pub fn leibniz_dw_n(f: &FunctionHandle, g: &FunctionHandle, x: &Complex, n: usize) -> Result<Complex> {
    let bits = x.bits();
    let w = x.sqrt_w();
    let mut fcache: HashMap<(usize, usize), Complex> = HashMap::new();
    let mut gcache: HashMap<(usize, usize), Complex> = HashMap::new();
    let mut acc = Complex::zero(bits);
    for k in 0..=n {
        let c = leibniz_c(n as u64, k as u64)?;
        if c == num_rational::BigRational::from_integer(0.into()) {
            continue;
        }
        let c = Real::from_rational(&c, bits);
        for j in 0..=(n - k) {
            let fk = (n - k - j, j + k);
            let gk = (j, n - j);
            if !fcache.contains_key(&fk) {
                fcache.insert(fk, apply_word_with_root(f, &w, &word(fk.0, fk.1))?);
            }
            if !gcache.contains_key(&gk) {
                gcache.insert(gk, apply_word_with_root(g, &w, &word(gk.0, gk.1))?);
            }
            let b = binomial((n - k) as u64, j as u64).to_f64().expect("small binomial");
            let term = (&fcache[&fk] * &gcache[&gk]).scale(&c).scale_f64(b);
            acc = &acc + &term;
        }
    }
    Ok(acc)
}

/// Quotient rule `(D_W f * A_W g - A_W f * D_W g) / (g(x+) g(x-))`.
pub fn quotient_dw(f: &FunctionHandle, g: &FunctionHandle, x: &Complex) -> Result<Complex> {
    let w = x.sqrt_w();
    let gp = g.eval(&lattice_point(&w, 1))?;
    let gm = g.eval(&lattice_point(&w, -1))?;
    if gp.is_zero() || gm.is_zero() {
        return Err(Error::ZeroDenominator(format!("g vanishes at a neighbour of {x}")));
    }
    let df = apply_dw_with_root(f, &w)?;
    let af = apply_aw_with_root(f, &w)?;
    let dg = apply_dw_with_root(g, &w)?;
    let ag = apply_aw_with_root(g, &w)?;
    Ok(&(&(&df * &ag) - &(&af * &dg)) / &(&gp * &gm))
}

/// `(A_W D_W f - D_W A_W f - D_W^2 f / 2)(x)`.
pub fn commutator_residual(f: &FunctionHandle, x: &Complex) -> Result<Complex> {
    let w = x.sqrt_w();
    let ad = apply_word_with_root(f, &w, &[Op::A, Op::D])?;
    let da = apply_word_with_root(f, &w, &[Op::D, Op::A])?;
    let dd = apply_word_with_root(f, &w, &[Op::D, Op::D])?;
    Ok(&(&ad - &da) - &dd.scale_f64(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::tau_eval;

    const B: usize = 128;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, B)
    }

    fn handle<F>(f: F) -> FunctionHandle
    where
        F: Fn(&Complex) -> Complex + Send + Sync + 'static,
    {
        FunctionHandle::new("test", PrecisionPolicy::default(), move |x| Ok(f(x)))
    }

    fn near(a: &Complex, b: &Complex, tol: f64) -> bool {
        a.rel_diff(b, 1.0) < tol
    }

    #[test]
    fn averaging_examples() {
        let id = handle(|x| x.clone());
        let x = c(2.0, 1.0);
        assert!(near(&apply_aw(&id, &x).unwrap(), &x.add_f64(-0.25), 1e-30));
        let k = handle(|_| Complex::from_f64(3.0, -1.0, B));
        assert!(near(&apply_aw(&k, &x).unwrap(), &c(3.0, -1.0), 1e-30));
        let sq = handle(|x| x * x);
        assert!(near(&apply_aw(&sq, &c(1.0, 0.0)).unwrap(), &c(-7.0 / 16.0, 0.0), 1e-30));
    }

    #[test]
    fn difference_examples() {
        let id = handle(|x| x.clone());
        let sq = handle(|x| x * x);
        for x in [c(3.0, 0.0), c(-2.0, 0.5), c(0.0, 0.0), c(-0.25, 0.0)] {
            assert!(near(&apply_dw(&id, &x).unwrap(), &c(1.0, 0.0), 1e-20));
            let want = x.scale_f64(2.0).add_f64(-0.5);
            assert!(near(&apply_dw(&sq, &x).unwrap(), &want, 1e-20));
        }
    }

    #[test]
    fn origin_limit_is_derivative_at_minus_quarter() {
        let cube = handle(|x| x.powi(3));
        let got = apply_dw(&cube, &c(0.0, 0.0)).unwrap();
        assert!(near(&got, &c(3.0 / 16.0, 0.0), 1e-20));
    }

    #[test]
    fn tau_rule() {
        let x0 = c(0.7, -0.3);
        let x0p = lattice_point(&x0.sqrt_w(), 1);
        for k in 1..=8usize {
            let x0c = x0.clone();
            let tk = handle(move |x| tau_eval(k, x, &x0c));
            for x in [c(1.3, 0.4), c(-4.0, 2.0)] {
                let got = apply_dw(&tk, &x).unwrap();
                let want = tau_eval(k - 1, &x, &x0p).scale_f64(-(k as f64));
                assert!(near(&got, &want, 1e-25), "k = {k}");
            }
        }
    }

    #[test]
    fn iterated_examples() {
        let sq = handle(|x| x * x);
        let x = c(1.7, -0.2);
        assert!(near(&apply_dw_iterated(&sq, &x, 0).unwrap(), &(&x * &x), 1e-30));
        assert!(near(&apply_dw_iterated(&sq, &x, 2).unwrap(), &c(2.0, 0.0), 1e-25));
        let t3 = handle(|x| tau_eval(3, x, &Complex::zero(B)));
        assert!(near(&apply_dw_iterated(&t3, &c(5.0, 1.0), 3).unwrap(), &c(-6.0, 0.0), 1e-25));
    }

    #[test]
    fn cooper_examples() {
        let sq = handle(|x| x * x);
        assert!(near(&cooper_dw_n(&sq, &c(9.0, 0.0), 2).unwrap(), &c(2.0, 0.0), 1e-25));
        let f = handle(|x| x.exp());
        let x = c(2.0, 1.0);
        assert!(near(&cooper_dw_n(&f, &x, 1).unwrap(), &apply_dw(&f, &x).unwrap(), 1e-30));
        assert!(near(&cooper_dw_n(&f, &x, 0).unwrap(), &x.exp(), 1e-30));
        // -1/4 has 2 z0 i = -1, which hits a zero factor for n >= 2
        assert!(matches!(cooper_dw_n(&f, &c(-0.25, 0.0), 2), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn leibniz_first_order_is_product_rule() {
        let f = handle(|x| x.powi(3).add_f64(1.0));
        let g = handle(|x| x.sin());
        let x = c(0.8, 0.6);
        let lhs = leibniz_dw_n(&f, &g, &x, 1).unwrap();
        let rhs = &(&apply_aw(&f, &x).unwrap() * &apply_dw(&g, &x).unwrap())
            + &(&apply_dw(&f, &x).unwrap() * &apply_aw(&g, &x).unwrap());
        assert!(near(&lhs, &rhs, 1e-30));
        let id = handle(|x| x.clone());
        assert!(near(&leibniz_dw_n(&id, &id, &x, 2).unwrap(), &c(2.0, 0.0), 1e-25));
    }

    #[test]
    fn quotient_and_commutator_examples() {
        let sq = handle(|x| x * x);
        let id = handle(|x| x.clone());
        let x = c(2.5, -1.5);
        assert!(quotient_dw(&sq, &sq, &x).unwrap().abs().to_f64() < 1e-30);
        assert!(near(&quotient_dw(&sq, &id, &x).unwrap(), &c(1.0, 0.0), 1e-25));
        let k = handle(|_| Complex::from_f64(2.0, 0.0, B));
        assert!(commutator_residual(&k, &x).unwrap().is_zero());
        let t4 = handle(|x| tau_eval(4, x, &Complex::zero(B)));
        let r = commutator_residual(&t4, &c(5.0, 0.0)).unwrap();
        assert!(r.abs().to_f64() < 1e-20);
    }

    #[test]
    fn branch_independence() {
        let f = handle(|x| x.exp().add_f64(1.0));
        let x = c(-1.5, 0.7);
        let w = x.sqrt_w();
        let nw = -&w;
        assert!(near(&apply_dw_with_root(&f, &w).unwrap(), &apply_dw_with_root(&f, &nw).unwrap(), 1e-30));
        assert!(near(&apply_aw_with_root(&f, &w).unwrap(), &apply_aw_with_root(&f, &nw).unwrap(), 1e-30));
        let d3 = word(0, 3);
        let a = apply_word_with_root(&f, &w, &d3).unwrap();
        let b = apply_word_with_root(&f, &nw, &d3).unwrap();
        assert!(near(&a, &b, 1e-25));
    }

    #[test]
    fn degenerate_node_inside_word() {
        let f = handle(|x| x.exp());
        // x = -1: w = i, and w - i lands on the origin two levels down
        let r = apply_dw_iterated(&f, &c(-1.0, 0.0), 3);
        assert!(matches!(r, Err(Error::DegenerateNode { .. })));
    }
}
