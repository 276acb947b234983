//! Maximal term and central index of a Wilson series at 0, order
//! estimators, comparison sequences, tau-normality and the asymptotic
//! checks built on them.

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diffeq::least_squares;
use crate::error::{Error, Result};
use crate::numerics::{max_modulus, Complex, PrecisionPolicy, Real, DEFAULT_SAMPLES};
use crate::operators::{dw_n, FunctionHandle};
use crate::series::{EntireFunctionSpec, WilsonSeries};

/// Smallest central index for which `b(N)` and the kappas are evaluated.
pub const MIN_ASYMPTOTIC_N: usize = 16;

/// Consecutive small, decreasing terms required to stop the scan.
const SCAN_RUN: usize = 10;

#[derive(Clone, Debug)]
pub struct MuNuResult {
    pub r: f64,
    /// `ln mu_W(r; f)`.
    pub ln_mu: f64,
    pub mu: Real,
    pub nu: usize,
    /// Last index examined when certifying the maximum.
    pub scan_limit: usize,
    /// `ln(|a_n| r (r+1^2) ... (r+(n-1)^2))` for every available `n`.
    pub ln_terms: Vec<f64>,
}

impl MuNuResult {
    pub fn term_ratio_ln(&self, n: usize) -> f64 {
        self.ln_terms[n] - self.ln_mu
    }
}

/// `ln |tau_n(r; 0)|` for `n = 0..len`.
pub fn ln_tau_abs(r: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0f64;
    for j in 0..len {
        out.push(acc);
        acc += (r + (j * j) as f64).ln();
    }
    out
}

/// Maximal term `mu_W(r;f) = max_n |a_n| r(r+1^2)...(r+(n-1)^2)` and the
/// largest maximizing index. For an infinite series the scan must reach
/// ten consecutive decreasing terms below `mu 2^{-bits/4}`.
pub fn mu_nu(s: &WilsonSeries, r: f64) -> Result<MuNuResult> {
    if !s.at_origin() {
        return Err(Error::Precondition("maximal term is defined for series at x0 = 0".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    let len = s.len();
    let bits = s.precision().bits();
    let tau = ln_tau_abs(r, len);
    let ln_terms: Vec<f64> = s.coeffs().iter().zip(&tau).map(|(a, t)| a.abs().ln_abs_f64() + t).collect();
    let ln_small = -(bits as f64) / 4.0 * std::f64::consts::LN_2;
    let mut ln_mu = f64::NEG_INFINITY;
    let mut nu = 0usize;
    let mut run = 0usize;
    let mut scan_limit = None;
    for (n, &lt) in ln_terms.iter().enumerate() {
        let tol = 4.0 * f64::EPSILON * ln_mu.abs().max(1.0);
        if lt >= ln_mu - tol && lt.is_finite() {
            if lt > ln_mu {
                ln_mu = lt;
            }
            nu = n;
            run = 0;
            continue;
        }
        let decreasing = n == 0 || lt < ln_terms[n - 1] || lt == f64::NEG_INFINITY;
        if lt - ln_mu < ln_small && decreasing {
            run += 1;
        } else {
            run = 0;
        }
        if !s.is_finite() && run >= SCAN_RUN {
            scan_limit = Some(n);
            break;
        }
    }
    let scan_limit = match scan_limit {
        Some(l) => l,
        None if s.is_finite() => len.saturating_sub(1),
        None => {
            let last = ln_terms.last().copied().unwrap_or(f64::NEG_INFINITY) - ln_mu;
            return Err(Error::Truncation { index: len, last_term: last.exp() });
        }
    };
    let mu = if ln_mu == f64::NEG_INFINITY {
        Real::zero(bits)
    } else {
        let mut m = s.coeffs()[nu].abs();
        for j in 0..nu {
            m = &m * &Real::from_f64(r, bits).add_f64((j * j) as f64);
        }
        m
    };
    Ok(MuNuResult { r, ln_mu, mu, nu, scan_limit, ln_terms })
}

fn ln_abs_coeffs(s: &WilsonSeries) -> Vec<f64> {
    s.coeffs().iter().map(|a| a.abs().ln_abs_f64()).collect()
}

/// Running maximum of `n ln n / (-ln|a_n|)` over the top half of the
/// available indices. A finite prefix only estimates a limsup.
pub fn order_from_coeffs(s: &WilsonSeries) -> Result<f64> {
    if s.is_finite() {
        return Ok(0.0);
    }
    let ln_a = ln_abs_coeffs(s);
    let nonzero = ln_a.iter().filter(|v| v.is_finite()).count();
    if nonzero < 20 {
        return Err(Error::InsufficientData(format!("{nonzero} nonzero coefficients, need 20")));
    }
    let len = ln_a.len();
    let mut best = 0.0f64;
    for (n, &la) in ln_a.iter().enumerate().skip(len / 2).filter(|(n, _)| *n >= 2) {
        if la.is_finite() && la < 0.0 {
            let nf = n as f64;
            best = best.max(nf * nf.ln() / -la);
        }
    }
    Ok(best)
}

/// Fits `-ln|a_n| = A n ln n + B n + C` over the top half of the indices
/// and returns `1/A`. Reported next to [`order_from_coeffs`] as a
/// diagnostic; it removes the `n` term that biases the literal ratio.
pub fn order_from_coeffs_fit(s: &WilsonSeries) -> Result<f64> {
    if s.is_finite() {
        return Ok(0.0);
    }
    let ln_a = ln_abs_coeffs(s);
    let len = ln_a.len();
    let rows: Vec<([f64; 3], f64)> = ln_a
        .iter()
        .enumerate()
        .skip(len / 2)
        .filter(|(n, v)| *n >= 2 && v.is_finite())
        .map(|(n, v)| {
            let nf = n as f64;
            ([nf * nf.ln(), nf, 1.0], -v)
        })
        .collect();
    if rows.len() < 10 {
        return Err(Error::InsufficientData(format!("{} usable coefficients in the top half", rows.len())));
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (x, y) in &rows {
        for i in 0..3 {
            aty[i] += x[i] * y;
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
        }
    }
    let c = solve3(ata, aty).ok_or_else(|| Error::InsufficientData("singular fit".into()))?;
    if c[0] <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / c[0])
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (v[i] - s) / m[i][i];
    }
    Some(x)
}

/// Least-squares slope of `ln+ nu` against `ln r` over the top two decades
/// of the samples.
pub fn order_from_nu(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 5 {
        return Err(Error::InsufficientData(format!("{} samples, need 5", samples.len())));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 3.0 - 1e-9 {
        return Err(Error::InsufficientData("samples span less than three decades".into()));
    }
    let cut = hi / 100.0 * (1.0 - 1e-12);
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|s| s.0 >= cut).map(|&(r, nu)| (r.ln(), if nu > 1.0 { nu.ln() } else { 0.0 })).collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("fewer than two samples in the top two decades".into()));
    }
    Ok(least_squares(&pts).0)
}

// 8-point Gauss-Legendre on [-1, 1].
const GL_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss_legendre<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..4 {
        s += GL_W[i] * (f(c - h * GL_X[i]) + f(c + h * GL_X[i]));
    }
    s * h
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Comparison sequences `alpha_n = exp(int_0^n alpha)` and
/// `rho_n = exp(-alpha(n))`. `alpha` is linear on `[0, t0]` and satisfies
/// `alpha'(t) = -1/(t ln t (ln ln t)^{1+delta})` beyond `t0`. `t0` is kept
/// through its logarithm because small `delta` pushes it far past `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonSchedule {
    pub delta: f64,
    /// `ln t0`.
    pub ln_t0: f64,
    /// `ln ln t0`.
    pub lnln_t0: f64,
    /// `s0 = 1/(ln t0 (ln ln t0)^{1+delta})`; `alpha(t0) = -2 s0`.
    pub s0: f64,
}

/// `t0` is the first entry of `e^e, 10^2, 10^3, ...` with
/// `(ln ln t0)^{-delta}/delta + 2 s0 <= ln 2`.
pub fn make_schedule(delta: f64) -> Result<ComparisonSchedule> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    let feasible = |ln_t0: f64| {
        let l = ln_t0.ln();
        let s0 = 1.0 / (ln_t0 * l.powf(1.0 + delta));
        (l.powf(-delta) / delta + 2.0 * s0 <= std::f64::consts::LN_2, s0)
    };
    let e = std::f64::consts::E;
    let mut ln_t0 = e;
    let mut k = 2u32;
    loop {
        let (ok, s0) = feasible(ln_t0);
        if ok {
            return Ok(ComparisonSchedule { delta, ln_t0, lnln_t0: ln_t0.ln(), s0 });
        }
        ln_t0 = k as f64 * std::f64::consts::LN_10;
        k = k.checked_add(1).ok_or_else(|| Error::NonConvergent("t0 ladder overflow".into()))?;
    }
}

impl ComparisonSchedule {
    /// `t0` as `f64`; infinite when it does not fit.
    pub fn t0(&self) -> f64 {
        self.ln_t0.exp()
    }

    /// `ln |alpha'|` on the linear part, equal to `ln(s0/t0)`.
    pub fn ln_slope(&self) -> f64 {
        self.s0.ln() - self.ln_t0
    }

    fn linear(&self, t: f64) -> bool {
        t <= 0.0 || t.ln() <= self.ln_t0
    }

    /// Total decrease of `alpha` on `[t0, inf)`.
    pub fn tail_drop(&self) -> f64 {
        self.lnln_t0.powf(-self.delta) / self.delta
    }

    pub fn alpha(&self, t: f64) -> f64 {
        if self.linear(t) {
            let frac = if t <= 0.0 { 0.0 } else { (t.ln() - self.ln_t0).exp() };
            -self.s0 - self.s0 * frac
        } else {
            let l = t.ln().ln();
            -2.0 * self.s0 + (l.powf(-self.delta) - self.lnln_t0.powf(-self.delta)) / self.delta
        }
    }

    /// `ln |alpha'(t)|`.
    pub fn ln_abs_alpha_prime(&self, t: f64) -> f64 {
        if self.linear(t) {
            self.ln_slope()
        } else {
            let lt = t.ln();
            -(lt + lt.ln() + (1.0 + self.delta) * lt.ln().ln())
        }
    }

    pub fn rho(&self, n: f64) -> f64 {
        (-self.alpha(n)).exp()
    }

    /// `ln int_a^b k(u) |alpha'(u)| du` for a nonnegative kernel with
    /// `kernel_int(a, b) = int_a^b k`.
    fn ln_kernel_integral<K, I>(&self, a: f64, b: f64, k: K, kernel_int: I) -> f64
    where
        K: Fn(f64) -> f64,
        I: Fn(f64, f64) -> f64,
    {
        if b <= a {
            return f64::NEG_INFINITY;
        }
        let mut out = f64::NEG_INFINITY;
        let split = if self.linear(b) { b } else if self.linear(a) { self.t0() } else { a };
        if split > a {
            let ki = kernel_int(a, split);
            if ki > 0.0 {
                out = self.ln_slope() + ki.ln();
            }
        }
        if b > split {
            let pieces = ((b - split).ceil() as usize).clamp(1, 64);
            let h = (b - split) / pieces as f64;
            let mut total = 0.0;
            for p in 0..pieces {
                let lo = split + p as f64 * h;
                total += gauss_legendre(lo, lo + h, |u| k(u) * self.ln_abs_alpha_prime(u).exp());
            }
            if total > 0.0 {
                out = log_add(out, total.ln());
            }
        }
        out
    }

    /// `ln(ln rho_{n+1} - ln rho_n) = ln int_n^{n+1} |alpha'|`.
    pub fn ln_rho_increase(&self, n: f64) -> f64 {
        self.ln_kernel_integral(n, n + 1.0, |_| 1.0, |a, b| b - a)
    }

    /// `ln(ln(rho_n) - ln(alpha_{n-1}/alpha_n))`, the gap of the lower
    /// containment `rho_n > alpha_{n-1}/alpha_n`.
    pub fn ln_lower_gap(&self, n: f64) -> f64 {
        let base = n - 1.0;
        self.ln_kernel_integral(base, n, |u| u - base, |a, b| ((b - base).powi(2) - (a - base).powi(2)) / 2.0)
    }

    /// `ln(ln(alpha_n/alpha_{n+1}) - ln rho_n)`, the gap of the upper
    /// containment.
    pub fn ln_upper_gap(&self, n: f64) -> f64 {
        let top = n + 1.0;
        self.ln_kernel_integral(n, top, |u| top - u, |a, b| ((top - a).powi(2) - (top - b).powi(2)) / 2.0)
    }

    /// `ln(2 ln alpha_n - ln alpha_{n-1} - ln alpha_{n+1})`.
    pub fn ln_concavity_gap(&self, n: f64) -> f64 {
        log_add(self.ln_lower_gap(n), self.ln_upper_gap(n))
    }

    /// `K(n, N) = -(ln(alpha_n/alpha_N) + (n-N) ln rho_N)
    ///          = int between N and n of |v - n| |alpha'(v)| dv >= 0`.
    pub fn normal_deficit(&self, n: usize, big_n: usize) -> f64 {
        if n == big_n {
            return 0.0;
        }
        let (lo, hi) = if n < big_n { (n as f64, big_n as f64) } else { (big_n as f64, n as f64) };
        let nf = n as f64;
        let ln = self.ln_kernel_integral(
            lo,
            hi,
            |v| (v - nf).abs(),
            |a, b| {
                let ia = (a - nf).abs().powi(2) / 2.0;
                let ib = (b - nf).abs().powi(2) / 2.0;
                (ia - ib).abs()
            },
        );
        ln.exp()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScheduleCheck {
    pub range_ok: bool,
    pub rho_bounds_ok: bool,
    pub rho_monotone_ok: bool,
    pub log_concave_ok: bool,
    pub containment_ok: bool,
    pub first_failure: Option<String>,
}

impl ScheduleCheck {
    pub fn all(&self) -> bool {
        self.range_ok && self.rho_bounds_ok && self.rho_monotone_ok && self.log_concave_ok && self.containment_ok
    }
}

/// Checks the schedule invariants for `n <= n_max`. "Logarithmically convex"
/// in the construction means `alpha_{n-1} alpha_{n+1} <= alpha_n^2`, which is
/// what a decreasing `alpha` yields and what the containments require.
pub fn check_schedule(s: &ComparisonSchedule, n_max: usize) -> ScheduleCheck {
    let ln2 = std::f64::consts::LN_2;
    let mut c = ScheduleCheck {
        range_ok: s.alpha(0.0) <= 0.0 && -2.0 * s.s0 - s.tail_drop() >= -ln2,
        rho_bounds_ok: true,
        rho_monotone_ok: true,
        log_concave_ok: true,
        containment_ok: s.alpha(0.0) < 0.0 && s.ln_upper_gap(0.0).is_finite(),
        first_failure: None,
    };
    let note = |c: &mut ScheduleCheck, what: &str, n: usize| {
        if c.first_failure.is_none() {
            c.first_failure = Some(format!("{what} fails at n = {n}"));
        }
    };
    for n in 0..=n_max {
        let nf = n as f64;
        let a = s.alpha(nf);
        if !(a <= 0.0 && a >= -ln2) {
            c.range_ok = false;
            note(&mut c, "range", n);
        }
        if !(a < 0.0 && a > -ln2) {
            c.rho_bounds_ok = false;
            note(&mut c, "1 < rho_n < 2", n);
        }
        if !s.ln_rho_increase(nf).is_finite() {
            c.rho_monotone_ok = false;
            note(&mut c, "rho monotonicity", n);
        }
        if n >= 1 {
            if !s.ln_concavity_gap(nf).is_finite() {
                c.log_concave_ok = false;
                note(&mut c, "log-concavity", n);
            }
            if !(s.ln_lower_gap(nf).is_finite() && s.ln_upper_gap(nf).is_finite()) {
                c.containment_ok = false;
                note(&mut c, "containment", n);
            }
        }
    }
    c
}

/// `eps_{n,N} = (n^2 + ... + (N-1)^2) / N^gamma`.
pub fn epsilon_nn(n: usize, big_n: usize, gamma: f64) -> Result<f64> {
    if n >= big_n {
        return Err(Error::Precondition(format!("need n < N, got n = {n}, N = {big_n}")));
    }
    let sq = |m: u128| m * (m + 1) * (2 * m + 1) / 6;
    let total = sq(big_n as u128 - 1) - if n == 0 { 0 } else { sq(n as u128 - 1) };
    Ok(total as f64 / (big_n as f64).powf(gamma))
}

/// `eps_{n,N}` exactly, for integer `gamma`.
pub fn epsilon_nn_exact(n: usize, big_n: usize, gamma: u32) -> Result<BigRational> {
    if n >= big_n {
        return Err(Error::Precondition(format!("need n < N, got n = {n}, N = {big_n}")));
    }
    let num: num_bigint::BigInt = (n..big_n).map(|k| num_bigint::BigInt::from(k * k)).sum();
    Ok(BigRational::new(num, num_bigint::BigInt::from(big_n).pow(gamma)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityWitness {
    pub n: usize,
    /// `ln |a_n tau_n| - ln mu`.
    pub lhs: f64,
    /// Logarithm of the permitted ratio.
    pub rhs: f64,
}

/// Tests the tau-normality inequalities with `N = nu_W(r; f)`, over every
/// available coefficient. Returns the first violating index, if any.
pub fn tau_normal_from(mn: &MuNuResult, gamma: f64, sched: &ComparisonSchedule) -> (bool, Option<NormalityWitness>) {
    let big_n = mn.nu;
    let tol = 64.0 * f64::EPSILON * mn.ln_mu.abs().max(1.0);
    for (n, &lt) in mn.ln_terms.iter().enumerate() {
        if n == big_n || lt == f64::NEG_INFINITY {
            continue;
        }
        let mut rhs = -sched.normal_deficit(n, big_n);
        if n < big_n {
            rhs += epsilon_nn(n, big_n, gamma).map(f64::ln_1p).unwrap_or(0.0);
        }
        let lhs = lt - mn.ln_mu;
        if lhs > rhs + tol {
            return (false, Some(NormalityWitness { n, lhs, rhs }));
        }
    }
    (true, None)
}

pub fn is_tau_normal(s: &WilsonSeries, r: f64, gamma: f64, sched: &ComparisonSchedule) -> Result<(bool, Option<NormalityWitness>)> {
    let mn = mu_nu(s, r)?;
    Ok(tau_normal_from(&mn, gamma, sched))
}

#[derive(Clone, Debug)]
pub struct ExceptionalScan {
    pub radii: Vec<f64>,
    pub flagged: Vec<bool>,
    /// Sum of `Delta ln r` over the cells of flagged radii; a cell runs
    /// between the geometric midpoints with the neighbours.
    pub log_measure: f64,
}

/// Logarithmic measure of the cells of the flagged grid points.
pub fn flagged_log_measure(radii: &[f64], flagged: &[bool]) -> f64 {
    let m = radii.len();
    let mut total = 0.0;
    for i in 0..m {
        if !flagged[i] {
            continue;
        }
        let lo = if i == 0 { radii[0].ln() } else { 0.5 * (radii[i - 1].ln() + radii[i].ln()) };
        let hi = if i + 1 == m { radii[i].ln() } else { 0.5 * (radii[i].ln() + radii[i + 1].ln()) };
        total += hi - lo;
    }
    total
}

/// Flags tau-exceptional grid radii and estimates their logarithmic measure.
pub fn exceptional_scan(s: &WilsonSeries, radii: &[f64], gamma: f64, sched: &ComparisonSchedule) -> Result<ExceptionalScan> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("radius grid must be increasing".into()));
    }
    let flagged: Vec<bool> = radii
        .par_iter()
        .map(|&r| Ok(!is_tau_normal(s, r, gamma, sched)?.0))
        .collect::<Result<_>>()?;
    let log_measure = flagged_log_measure(radii, &flagged);
    Ok(ExceptionalScan { radii: radii.to_vec(), flagged, log_measure })
}

/// Finite series at 0 whose central index jumps from `n` to `n+1` exactly at
/// `transitions[n]`: `a_{n+1} = a_n / (R_n + n^2)`, `a_0 = 1`. The transitions
/// must be increasing.
pub fn series_with_transitions(transitions: &[f64], precision: PrecisionPolicy) -> Result<WilsonSeries> {
    if transitions.windows(2).any(|w| w[1] <= w[0]) || transitions.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Precondition("transitions must be positive and increasing".into()));
    }
    let mut a = vec![BigRational::from_integer(1.into())];
    for (n, &r) in transitions.iter().enumerate() {
        let d = BigRational::from_f64(r).ok_or_else(|| Error::Precondition(format!("bad transition {r}")))?
            + BigRational::from_integer((n * n).into());
        let next = a[n].clone() / d;
        a.push(next);
    }
    Ok(WilsonSeries::from_exact(a, precision, true))
}

/// `b(N) = 1/(N ln N (ln ln N)^{1+delta})`.
pub fn b_of_n(big_n: usize, delta: f64) -> Result<f64> {
    if big_n < MIN_ASYMPTOTIC_N {
        return Err(Error::Precondition(format!("b(N) needs N >= {MIN_ASYMPTOTIC_N}, got {big_n}")));
    }
    let n = big_n as f64;
    Ok(1.0 / (n * n.ln() * n.ln().ln().powf(1.0 + delta)))
}

/// `floor(sqrt((beta/b(N)) ln(1/b(N))))`.
pub fn kappa_tail(big_n: usize, beta: f64, delta: f64) -> Result<usize> {
    let b = b_of_n(big_n, delta)?;
    Ok(((beta / b) * (1.0 / b).ln()).sqrt().floor() as usize)
}

/// `floor(sqrt(N (ln N)^2 (ln ln N)^{1+delta}))`.
pub fn kappa_main(big_n: usize, delta: f64) -> Result<usize> {
    if big_n < MIN_ASYMPTOTIC_N {
        return Err(Error::Precondition(format!("kappa needs N >= {MIN_ASYMPTOTIC_N}, got {big_n}")));
    }
    let n = big_n as f64;
    Ok((n * n.ln().powi(2) * n.ln().ln().powf(1.0 + delta)).sqrt().floor() as usize)
}

/// `K_0 = K_1 = 9`, `K_n = (1 + n^{2-gamma})^n (1 - n^{2-gamma})^{-n}`.
pub fn kn_bound(n: usize, gamma: f64) -> Result<f64> {
    if n < 2 {
        return Ok(9.0);
    }
    let q = (n as f64).powf(2.0 - gamma);
    if q >= 1.0 {
        return Err(Error::Precondition(format!("K_n needs n^(2-gamma) < 1, got {q}")));
    }
    Ok((n as f64 * ((1.0 + q).ln() - (1.0 - q).ln())).exp())
}

/// `M(r; f)` on `|x| = r`.
pub fn max_modulus_of(f: &FunctionHandle, r: f64) -> Result<crate::numerics::MaxModulus> {
    max_modulus(|x| f.eval(x), &Real::from_f64(r, f.precision().bits()), DEFAULT_SAMPLES)
}

/// `|a_n tau_n(r;0)| <= K_n M(r;f)` for `r > max(4n^2, n^gamma)`.
pub fn lemma_gg_check(s: &WilsonSeries, f: &FunctionHandle, n: usize, r: f64, gamma: f64) -> Result<bool> {
    let need = (4.0 * (n * n) as f64).max((n as f64).powf(gamma));
    if !(r > need) {
        return Err(Error::Precondition(format!("K_n bound needs r > {need}, got {r}")));
    }
    if n >= s.len() {
        return Err(Error::Truncation { index: n, last_term: 0.0 });
    }
    let ln_term = s.coeffs()[n].abs().ln_abs_f64() + ln_tau_abs(r, n + 1)[n];
    let ln_m = max_modulus_of(f, r)?.value.ln_abs_f64();
    Ok(ln_term <= kn_bound(n, gamma)?.ln() + ln_m + 1e-12 * ln_m.abs().max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MboundResult {
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// `mu_W <= K(r) M <= mu_W (ln+ mu_W)^{1/2 + eps}` with `K(r) = K_{nu_W(r)}`,
/// from precomputed logarithms.
pub fn mbound_from(ln_mu: f64, nu: usize, ln_m: f64, eps: f64, gamma: f64) -> Result<MboundResult> {
    if ln_mu < 1.0 {
        return Err(Error::Precondition("maximal term below e".into()));
    }
    let ln_k = kn_bound(nu, gamma)?.ln();
    let slack = 1e-12 * ln_mu.abs().max(1.0);
    Ok(MboundResult {
        lower_ok: ln_mu <= ln_k + ln_m + slack,
        upper_ok: ln_k + ln_m <= ln_mu + (0.5 + eps) * ln_mu.ln() + slack,
    })
}

pub fn mbound_check(s: &WilsonSeries, f: &FunctionHandle, r: f64, eps: f64, gamma: f64) -> Result<MboundResult> {
    let mn = mu_nu(s, r)?;
    let ln_m = max_modulus_of(f, r)?.value.ln_abs_f64();
    mbound_from(mn.ln_mu, mn.nu, ln_m, eps, gamma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WvEstimate {
    pub upper_ok: bool,
    pub lower_ok: bool,
    /// Largest `lhs - rhs` in log space over all checked `k`.
    pub worst_margin: f64,
}

/// The decay inequalities `|a_{N+k} tau_{N+k}|/mu <= exp(-k^2 b(N+k)/2)` and
/// `|a_{N-k} tau_{N-k}|/mu <= (1 + 1/(3 N^{gamma-3})) exp(-k^2 b(N)/2)`.
pub fn wv_estimate_from(mn: &MuNuResult, gamma: f64, delta: f64) -> Result<WvEstimate> {
    let big_n = mn.nu;
    let b_n = b_of_n(big_n, delta)?;
    let slack = 64.0 * f64::EPSILON * mn.ln_mu.abs().max(1.0);
    let mut out = WvEstimate { upper_ok: true, lower_ok: true, worst_margin: f64::NEG_INFINITY };
    for (n, &lt) in mn.ln_terms.iter().enumerate() {
        if n == big_n || lt == f64::NEG_INFINITY {
            continue;
        }
        let lhs = lt - mn.ln_mu;
        let (rhs, upper) = if n > big_n {
            let k = (n - big_n) as f64;
            (-0.5 * k * k * b_of_n(n, delta)?, true)
        } else {
            let k = (big_n - n) as f64;
            let pre = (1.0 / (3.0 * (big_n as f64).powf(gamma - 3.0))).ln_1p();
            (pre - 0.5 * k * k * b_n, false)
        };
        out.worst_margin = out.worst_margin.max(lhs - rhs);
        if lhs > rhs + slack {
            if upper {
                out.upper_ok = false;
            } else {
                out.lower_ok = false;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailResult {
    pub kappa: usize,
    /// `ln sum_{|k-N| >= kappa} k^h |a_k tau_k|`.
    pub ln_tail: f64,
    /// `tail / (mu N^h b(N)^{(omega-1)/2})`.
    pub ratio: f64,
}

/// Tail of the series away from the central index, relative to
/// `mu N^h b(N)^{(omega-1)/2}`, summed over all available terms.
pub fn tail_from(mn: &MuNuResult, h: f64, beta: f64, omega: f64, delta: f64) -> Result<TailResult> {
    if !(omega > 0.0 && omega < beta) {
        return Err(Error::Precondition(format!("need 0 < omega < beta, got omega = {omega}, beta = {beta}")));
    }
    let big_n = mn.nu;
    let kappa = kappa_tail(big_n, beta, delta)?;
    tail_with_kappa(mn, h, omega, delta, kappa)
}

pub fn tail_with_kappa(mn: &MuNuResult, h: f64, omega: f64, delta: f64, kappa: usize) -> Result<TailResult> {
    let big_n = mn.nu;
    let b = b_of_n(big_n, delta)?;
    let mut ln_tail = f64::NEG_INFINITY;
    for (k, &lt) in mn.ln_terms.iter().enumerate() {
        if k.abs_diff(big_n) >= kappa && lt.is_finite() {
            let weight = if h == 0.0 { 0.0 } else if k == 0 { f64::NEG_INFINITY } else { h * (k as f64).ln() };
            ln_tail = log_add(ln_tail, lt + weight);
        }
    }
    let ln_scale = mn.ln_mu + h * (big_n as f64).ln() + 0.5 * (omega - 1.0) * b.ln();
    Ok(TailResult { kappa, ln_tail, ratio: (ln_tail - ln_scale).exp() })
}

pub fn tail_check(s: &WilsonSeries, r: f64, h: f64, beta: f64, omega: f64, delta: f64) -> Result<TailResult> {
    let mn = mu_nu(s, r)?;
    require_coverage(s, &mn, delta, kappa_tail(mn.nu, beta, delta)?)?;
    tail_from(&mn, h, beta, omega, delta)
}

/// Truncation unless the coefficients reach past `N + max(4 kappa_main, extra)`.
pub fn require_coverage(s: &WilsonSeries, mn: &MuNuResult, delta: f64, extra: usize) -> Result<()> {
    if s.is_finite() {
        return Ok(());
    }
    let need = mn.nu + (4 * kappa_main(mn.nu, delta)?).max(extra);
    if s.len() <= need.max(mn.scan_limit) {
        let last = mn.ln_terms.last().copied().unwrap_or(f64::NEG_INFINITY) - mn.ln_mu;
        return Err(Error::Truncation { index: s.len(), last_term: last.exp() });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WvMainResult {
    pub n: usize,
    pub kappa: usize,
    /// Residual at the maximum-modulus point divided by `(kappa/N) M`.
    pub argmax_over_bound: f64,
    pub argmax_over_m: f64,
    /// Largest residual over the random circle points, same normalisations.
    pub random_over_bound: f64,
    pub random_over_m: f64,
}

fn wv_residual(f: &FunctionHandle, x: &Complex, big_n: usize, n: usize) -> Result<Real> {
    let bits = x.bits();
    let d = dw_n(f, x, n)?;
    let scale = x.scale(&Real::one(bits).div_u64(big_n as u64)).powi(n as u64);
    Ok((&(&scale * &d) - &f.eval(x)?).abs())
}

/// `(x/N)^n D_W^n f(x) - f(x)` against `(kappa_main/N) M(r;f)` at the point of
/// maximum modulus and at eight seeded random points of the circle.
pub fn wv_main_check(
    f: &FunctionHandle,
    big_n: usize,
    r: f64,
    n: usize,
    delta: f64,
    seed: u64,
    argmax: &crate::numerics::MaxModulus,
) -> Result<WvMainResult> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let kappa = kappa_main(big_n, delta)?;
    let bits = f.precision().bits();
    let m = &argmax.value;
    let bound = m.mul_f64(kappa as f64).div_u64(big_n as u64);
    let at_max = wv_residual(f, &argmax.point, big_n, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r.to_bits());
    let rr = Real::from_f64(r, bits);
    let mut worst = Real::zero(bits);
    for _ in 0..8 {
        let t = Real::from_f64(rng.gen_range(0.0..std::f64::consts::TAU), bits);
        let x = Complex::new(&rr * &t.cos(), &rr * &t.sin());
        worst = worst.max(&wv_residual(f, &x, big_n, n)?);
    }
    Ok(WvMainResult {
        n,
        kappa,
        argmax_over_bound: (&at_max / &bound).to_f64(),
        argmax_over_m: (&at_max / m).to_f64(),
        random_over_bound: (&worst / &bound).to_f64(),
        random_over_m: (&worst / m).to_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub omega: f64,
    pub h: f64,
    pub orders: Vec<usize>,
    pub mbound_eps: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { delta: 1.0, gamma: 4.0, beta: 10.0, omega: 9.0, h: 0.0, orders: vec![1, 2], mbound_eps: 0.25, seed: 0 }
    }
}

/// One radius of a Wiman-Valiron scan.
#[derive(Clone, Debug, PartialEq)]
pub struct WvReport {
    pub r: f64,
    pub nu: usize,
    pub ln_mu: f64,
    pub mu: String,
    pub big_m: String,
    pub ln_big_m: f64,
    pub tau_normal: bool,
    pub witness: Option<usize>,
    /// `N >= 16`, where the asymptotic quantities are defined.
    pub asymptotic: bool,
    pub tail: Option<TailResult>,
    pub wv_main: Vec<WvMainResult>,
    pub wv_estimate: Option<WvEstimate>,
    pub mbound: Option<MboundResult>,
    pub error: Option<String>,
}

impl WvReport {
    fn failed(r: f64, e: &Error) -> Self {
        Self {
            r,
            nu: 0,
            ln_mu: f64::NAN,
            mu: String::new(),
            big_m: String::new(),
            ln_big_m: f64::NAN,
            tau_normal: false,
            witness: None,
            asymptotic: false,
            tail: None,
            wv_main: Vec::new(),
            wv_estimate: None,
            mbound: None,
            error: Some(e.to_string()),
        }
    }

    pub fn wv(&self, n: usize) -> Option<&WvMainResult> {
        self.wv_main.iter().find(|w| w.n == n)
    }
}

/// All checks at one radius. Numeric aborts are recorded in the row.
pub fn scan_radius(s: &WilsonSeries, f: &FunctionHandle, r: f64, cfg: &ScanConfig, sched: &ComparisonSchedule) -> WvReport {
    match scan_radius_inner(s, f, r, cfg, sched) {
        Ok(rep) => rep,
        Err(e) => WvReport::failed(r, &e),
    }
}

fn scan_radius_inner(s: &WilsonSeries, f: &FunctionHandle, r: f64, cfg: &ScanConfig, sched: &ComparisonSchedule) -> Result<WvReport> {
    let mn = mu_nu(s, r)?;
    let (tau_normal, witness) = tau_normal_from(&mn, cfg.gamma, sched);
    let mm = max_modulus_of(f, r)?;
    let ln_big_m = mm.value.ln_abs_f64();
    let asymptotic = mn.nu >= MIN_ASYMPTOTIC_N;
    let mut rep = WvReport {
        r,
        nu: mn.nu,
        ln_mu: mn.ln_mu,
        mu: mn.mu.to_decimal_string(20),
        big_m: mm.value.to_decimal_string(20),
        ln_big_m,
        tau_normal,
        witness: witness.map(|w| w.n),
        asymptotic,
        tail: None,
        wv_main: Vec::new(),
        wv_estimate: None,
        mbound: mbound_from(mn.ln_mu, mn.nu, ln_big_m, cfg.mbound_eps, cfg.gamma).ok(),
        error: None,
    };
    if asymptotic {
        require_coverage(s, &mn, cfg.delta, kappa_tail(mn.nu, cfg.beta, cfg.delta)?)?;
        rep.tail = Some(tail_from(&mn, cfg.h, cfg.beta, cfg.omega, cfg.delta)?);
        rep.wv_estimate = Some(wv_estimate_from(&mn, cfg.gamma, cfg.delta)?);
        for &n in &cfg.orders {
            rep.wv_main.push(wv_main_check(f, mn.nu, r, n, cfg.delta, cfg.seed, &mm)?);
        }
    }
    Ok(rep)
}

/// Runs [`scan_radius`] over the grid in parallel; rows follow the grid.
pub fn wv_scan(s: &WilsonSeries, f: &FunctionHandle, radii: &[f64], cfg: &ScanConfig) -> Result<Vec<WvReport>> {
    let sched = make_schedule(cfg.delta)?;
    Ok(radii.par_iter().map(|&r| scan_radius(s, f, r, cfg, &sched)).collect())
}

/// `points_per_decade` log-spaced radii from `r_min` to `r_max` inclusive.
pub fn log_grid(r_min: f64, r_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(r_min >= 1.0 && r_max > r_min) || points_per_decade == 0 {
        return Err(Error::Precondition(format!("bad grid [{r_min}, {r_max}] with {points_per_decade} points per decade")));
    }
    let steps = ((r_max / r_min).log10() * points_per_decade as f64 - 1e-9).ceil() as usize;
    let lo = r_min.log10();
    Ok((0..=steps)
        .map(|i| {
            let e = lo + i as f64 / points_per_decade as f64;
            if i == steps { r_max } else { 10f64.powf(e) }
        })
        .collect())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
}

/// Medians of `value` over the decades `[10^k, 10^{k+1})` that contain
/// selected rows, in increasing order; the top radius joins the last
/// decade.
pub fn decade_medians<F: Fn(&WvReport) -> Option<f64>>(rows: &[WvReport], value: F) -> Vec<(i32, f64)> {
    let top = rows.iter().map(|r| r.r).fold(0.0, f64::max);
    let mut groups: std::collections::BTreeMap<i32, Vec<f64>> = Default::default();
    for row in rows {
        if let Some(v) = value(row) {
            let mut d = row.r.log10().floor() as i32;
            if row.r == top && (row.r.log10() - row.r.log10().round()).abs() < 1e-9 && d > 0 {
                d -= 1;
            }
            groups.entry(d).or_default().push(v);
        }
    }
    groups.into_iter().filter_map(|(d, v)| median(v).map(|m| (d, m))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSummary {
    pub radii: usize,
    pub flagged: usize,
    pub errors: usize,
    pub flagged_log_measure: f64,
    pub order_from_nu: Option<f64>,
    pub nu_fit: Option<(f64, f64)>,
    pub tail_medians: Vec<(i32, f64)>,
    pub tail_nonincreasing: bool,
    pub tail_final_median: Option<f64>,
    pub wv_over_m_final: Vec<(usize, f64)>,
    pub wv_over_bound_max: Vec<(usize, f64)>,
    pub wv_estimate_ok: bool,
    pub mbound_ok: bool,
    pub degenerate: bool,
    pub pass: bool,
}

pub const TAIL_FINAL_MEDIAN_MAX: f64 = 0.1;
pub const WV_OVER_M_FINAL_MAX: f64 = 0.05;
pub const LOG_MEASURE_MAX: f64 = 1.0;

/// Acceptance view of a scan. Rows with `N < 16` enter only the normality,
/// measure and `Mbound` statements; the other checks need `b(N)`.
pub fn summarize(rows: &[WvReport], orders: &[usize]) -> ScanSummary {
    let ok_rows: Vec<&WvReport> = rows.iter().filter(|r| r.error.is_none()).collect();
    let flagged: Vec<bool> = rows.iter().map(|r| r.error.is_none() && !r.tau_normal).collect();
    let radii: Vec<f64> = rows.iter().map(|r| r.r).collect();
    let samples: Vec<(f64, f64)> = ok_rows.iter().map(|r| (r.r, r.nu as f64)).collect();
    let degenerate = ok_rows.windows(2).all(|w| w[0].nu == w[1].nu);
    let clean = |r: &WvReport| r.error.is_none() && r.tau_normal;
    let tail_medians = decade_medians(rows, |r| if clean(r) { r.tail.map(|t| t.ratio) } else { None });
    let tail_nonincreasing = tail_medians.windows(2).all(|w| w[1].1 <= w[0].1);
    let tail_final_median = tail_medians.last().map(|m| m.1);
    let mut wv_over_m_final = Vec::new();
    let mut wv_over_bound_max = Vec::new();
    for &n in orders {
        let med = decade_medians(rows, |r| if clean(r) { r.wv(n).map(|w| w.argmax_over_m) } else { None });
        if let Some(last) = med.last() {
            wv_over_m_final.push((n, last.1));
        }
        let worst = rows.iter().filter(|r| clean(r)).filter_map(|r| r.wv(n)).map(|w| w.argmax_over_bound).fold(f64::NAN, f64::max);
        if !worst.is_nan() {
            wv_over_bound_max.push((n, worst));
        }
    }
    let wv_estimate_ok = rows.iter().filter(|r| clean(r)).all(|r| r.wv_estimate.is_none_or(|w| w.upper_ok && w.lower_ok));
    let mbound_ok = rows.iter().filter(|r| clean(r)).all(|r| r.mbound.is_none_or(|m| m.lower_ok && m.upper_ok));
    let flagged_log_measure = flagged_log_measure(&radii, &flagged);
    let errors = rows.len() - ok_rows.len();
    let pass = if degenerate {
        errors == 0
    } else {
        errors == 0
            && tail_nonincreasing
            && tail_final_median.is_some_and(|m| m < TAIL_FINAL_MEDIAN_MAX)
            && wv_over_m_final.len() == orders.len()
            && wv_over_m_final.iter().all(|v| v.1 < WV_OVER_M_FINAL_MAX)
            && wv_over_bound_max.iter().all(|v| v.1 < 1.0)
            && wv_estimate_ok
            && mbound_ok
            && flagged_log_measure < LOG_MEASURE_MAX
    };
    ScanSummary {
        radii: rows.len(),
        flagged: flagged.iter().filter(|f| **f).count(),
        errors,
        flagged_log_measure,
        order_from_nu: order_from_nu(&samples).ok(),
        nu_fit: crate::diffeq::nu_power_law_fit(&samples).ok(),
        tail_medians,
        tail_nonincreasing,
        tail_final_median,
        wv_over_m_final,
        wv_over_bound_max,
        wv_estimate_ok,
        mbound_ok,
        degenerate,
        pass,
    }
}

/// Convenience: expansion, handle and scan of a spec at 0.
pub fn scan_spec(spec: &EntireFunctionSpec, n_max: usize, radii: &[f64], cfg: &ScanConfig, precision: PrecisionPolicy) -> Result<(WilsonSeries, Vec<WvReport>)> {
    let exp = crate::series::expand_wilson(spec, &Complex::zero(precision.bits()), n_max, precision)?;
    let s = exp.series.with_precision(precision);
    let f = spec.handle(precision);
    let rows = wv_scan(&s, &f, radii, cfg)?;
    Ok((s, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(v: &[i64]) -> WilsonSeries {
        WilsonSeries::from_exact(v.iter().map(|&x| BigRational::from_integer(x.into())).collect(), PrecisionPolicy::default(), true)
    }

    #[test]
    fn mu_nu_examples() {
        let sq = exact(&[0, 1, 1]);
        let m = mu_nu(&sq, 2.0).unwrap();
        assert_eq!(m.nu, 2);
        assert!((m.mu.to_f64() - 6.0).abs() < 1e-30);
        let c = exact(&[7]);
        for r in [1.0, 1e5] {
            let m = mu_nu(&c, r).unwrap();
            assert_eq!(m.nu, 0);
            assert!((m.mu.to_f64() - 7.0).abs() < 1e-30);
        }
    }

    #[test]
    fn ties_take_largest_index() {
        // terms at r = 1: 1, 1, 1*2 / 2 = 1
        let s = WilsonSeries::from_exact(
            vec![BigRational::from_integer(1.into()), BigRational::from_integer(1.into()), BigRational::new(1.into(), 2.into())],
            PrecisionPolicy::default(),
            true,
        );
        assert_eq!(mu_nu(&s, 1.0).unwrap().nu, 2);
    }

    #[test]
    fn truncated_infinite_series_aborts() {
        let mut s = exact(&[1, 1, 1, 1]);
        s = WilsonSeries::new(s.x0().clone(), s.coeffs().to_vec(), s.precision(), false).unwrap();
        assert!(matches!(mu_nu(&s, 10.0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn schedule_examples() {
        let s = make_schedule(1.0).unwrap();
        assert!((s.t0() - 1000.0).abs() < 1e-6);
        assert!((s.alpha(0.0) + s.s0).abs() < 1e-15);
        assert!((s.alpha(s.t0()) + 2.0 * s.s0).abs() < 1e-12);
        // 1e4 also satisfies the feasibility inequality
        let l: f64 = 1e4f64.ln().ln();
        let total = 1.0 / l + 2.0 / (1e4f64.ln() * l * l);
        assert!(total < std::f64::consts::LN_2 && (total - 0.495).abs() < 0.01);
        assert!((make_schedule(2.0).unwrap().t0() - 100.0).abs() < 1e-9);
        let half = make_schedule(0.5).unwrap();
        assert!(half.t0().is_infinite() && half.lnln_t0 > 8.0);
        assert!(make_schedule(0.0).is_err());
    }

    #[test]
    fn schedule_is_continuous_at_t0() {
        for d in [1.0, 2.0] {
            let s = make_schedule(d).unwrap();
            let t0 = s.t0();
            assert!((s.alpha(t0 * (1.0 - 1e-12)) - s.alpha(t0 * (1.0 + 1e-12))).abs() < 1e-12);
            let left = s.ln_abs_alpha_prime(t0 * (1.0 - 1e-12));
            let right = s.ln_abs_alpha_prime(t0 * (1.0 + 1e-12));
            assert!((left - right).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_gaps_match_direct_differences() {
        let s = make_schedule(2.0).unwrap();
        for n in [3usize, 99, 100, 101, 250, 4000] {
            let nf = n as f64;
            let int_alpha = |a: f64, b: f64| {
                let pieces = 64;
                let h = (b - a) / pieces as f64;
                (0..pieces).map(|p| gauss_legendre(a + p as f64 * h, a + (p + 1) as f64 * h, |u| s.alpha(u))).sum::<f64>()
            };
            let lower = -s.alpha(nf) + int_alpha(nf - 1.0, nf);
            let upper = -int_alpha(nf, nf + 1.0) + s.alpha(nf);
            assert!((s.ln_lower_gap(nf).exp() - lower).abs() < 1e-9 * lower.abs().max(1e-8), "n = {n}");
            assert!((s.ln_upper_gap(nf).exp() - upper).abs() < 1e-9 * upper.abs().max(1e-8), "n = {n}");
        }
    }

    #[test]
    fn epsilon_examples() {
        assert!((epsilon_nn(0, 10, 4.0).unwrap() - 0.0285).abs() < 1e-15);
        assert_eq!(epsilon_nn_exact(0, 10, 4).unwrap(), BigRational::new(285.into(), 10000.into()));
        assert!((epsilon_nn(9, 10, 4.0).unwrap() - 81.0 / 1e4).abs() < 1e-15);
        assert!(epsilon_nn(10, 10, 4.0).is_err());
    }

    #[test]
    fn b_and_kappa_examples() {
        let b = b_of_n(100, 1.0).unwrap();
        assert!((b - 9.31e-4).abs() < 1e-6);
        assert!(b_of_n(15, 1.0).is_err());
        assert!(kappa_tail(16, 1.0, 1.0).unwrap() >= 1);
    }

    #[test]
    fn kn_examples() {
        assert_eq!(kn_bound(0, 4.0).unwrap(), 9.0);
        assert_eq!(kn_bound(1, 4.0).unwrap(), 9.0);
        assert!((kn_bound(2, 4.0).unwrap() - 25.0 / 9.0).abs() < 1e-12);
        assert!((kn_bound(10, 4.0).unwrap() - (1.01f64 / 0.99).powi(10)).abs() < 1e-12);
    }

    #[test]
    fn polynomial_square_is_normal_and_tail_free() {
        let sq = exact(&[0, 1, 1]);
        let sched = make_schedule(1.0).unwrap();
        for r in [10.0, 1e3, 1e6] {
            assert!(is_tau_normal(&sq, r, 4.0, &sched).unwrap().0);
        }
    }

    #[test]
    fn transition_fixture_is_flagged_on_one_decade() {
        let mut t: Vec<f64> = (0..10).map(|i| 10.0 + 9.0 * i as f64).collect();
        let decade: Vec<f64> = (0..8).map(|i| 1e4 * 10f64.powf(i as f64 / 8.0)).collect();
        t.extend(decade.iter().map(|r| r * (1.0 - 1e-7)));
        let s = series_with_transitions(&t, PrecisionPolicy::default()).unwrap();
        for (n, &r) in t.iter().enumerate() {
            assert_eq!(mu_nu(&s, r * 1.01).unwrap().nu, n + 1);
        }
        let sched = make_schedule(1.0).unwrap();
        let grid = log_grid(1e3, 1e6, 8).unwrap();
        let scan = exceptional_scan(&s, &grid, 16.0, &sched).unwrap();
        let flagged: Vec<f64> = grid.iter().zip(&scan.flagged).filter(|(_, f)| **f).map(|(r, _)| *r).collect();
        assert_eq!(flagged.len(), 8, "{flagged:?}");
        assert!((scan.log_measure - std::f64::consts::LN_10).abs() < 1e-9);
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(1e3, 1e6, 8).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e3);
        assert_eq!(*g.last().unwrap(), 1e6);
        assert!(log_grid(0.5, 10.0, 8).is_err());
    }

    #[test]
    fn order_from_nu_synthetic() {
        let s: Vec<(f64, f64)> = (0..=32).map(|i| {
            let r = 10f64.powf(3.0 + i as f64 / 8.0);
            (r, (2.0 * r.powf(0.25)).round())
        }).collect();
        assert!((order_from_nu(&s).unwrap() - 0.25).abs() < 0.02);
        let flat: Vec<(f64, f64)> = s.iter().map(|(r, _)| (*r, 3.0)).collect();
        assert!(order_from_nu(&flat).unwrap().abs() < 1e-12);
        assert!(order_from_nu(&s[..10]).is_err());
    }

    #[test]
    fn order_from_coeffs_direct_formula() {
        let bits = 256;
        let coeffs: Vec<Complex> = (0..400usize)
            .map(|n| {
                let v = if n < 2 { 0.0 } else { -4.0 * n as f64 * (n as f64).ln() };
                Complex::from_real(Real::from_f64(v, bits).exp())
            })
            .collect();
        let s = WilsonSeries::new(Complex::zero(bits), coeffs, PrecisionPolicy::new(bits).unwrap(), false).unwrap();
        assert!((order_from_coeffs(&s).unwrap() - 0.25).abs() < 1e-9);
        assert_eq!(order_from_coeffs(&exact(&[1, 2, 3])).unwrap(), 0.0);
    }
}
