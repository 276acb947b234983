//! Exact combinatorics: binomials, rising factorials, the Leibniz-rule
//! coefficients `C(n,k)`, central factorial numbers `T(k,n)` and the
//! change-of-basis matrices between monomials and the Wilson basis at 0.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Real};

/// Ragged lower triangle; row `n` has `n + 1` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleTable<T> {
    rows: Vec<Vec<T>>,
}

impl<T> TriangleTable<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        for (n, r) in rows.iter().enumerate() {
            if r.len() != n + 1 {
                return Err(Error::Precondition(format!("row {n} has {} entries", r.len())));
            }
        }
        Ok(Self { rows })
    }

    pub fn n_max(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, k: usize) -> Option<&T> {
        self.rows.get(n).and_then(|r| r.get(k))
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Rising factorial `(a)_k` of an exact rational.
pub fn pochhammer(a: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut t = a.clone();
    for _ in 0..k {
        acc *= &t;
        t += BigRational::one();
    }
    acc
}

/// Rising factorial `(a)_k` at the precision of `a`.
pub fn pochhammer_complex(a: &Complex, k: u64) -> Complex {
    let mut acc = Complex::one(a.bits());
    let mut t = a.clone();
    for _ in 0..k {
        acc = &acc * &t;
        t = t.add_f64(1.0);
    }
    acc
}

/// Leibniz-rule coefficient from the closed form
/// `C(n,k) = (-1/4)^k (n-1+k)! / ((n-1-k)! k!)`, with `C(0,0) = 1` and
/// `C(n,n) = 0` for `n >= 1`.
pub fn leibniz_c(n: u64, k: u64) -> Result<BigRational> {
    if k > n {
        return Err(Error::OutOfRange(format!("C({n},{k}) needs k <= n")));
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    if k == n {
        return Ok(BigRational::zero());
    }
    let num = factorial(n - 1 + k);
    let den = factorial(n - 1 - k) * factorial(k) * BigInt::from(4).pow(k as u32);
    let v = BigRational::new(num, den);
    Ok(if k % 2 == 1 { -v } else { v })
}

/// Triangle of `C(n,k)` for `n <= n_max` from the three-term recurrence
/// `C(n,k) = C(n-1,k) - ((n+k-2)/2) C(n-1,k-1)`.
pub fn leibniz_c_table(n_max: usize) -> TriangleTable<BigRational> {
    let mut rows: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k == n {
                row.push(BigRational::zero());
                continue;
            }
            let up = prev.get(k).cloned().unwrap_or_else(BigRational::zero);
            let diag = if k == 0 {
                BigRational::zero()
            } else {
                rat((n + k) as i64 - 2, 2) * &prev[k - 1]
            };
            row.push(up - diag);
        }
        rows.push(row);
    }
    TriangleTable { rows }
}

/// Same triangle via the full-row recurrence
/// `C(n,k) = sum_j (-1/2)^(k-j) ((n-1-j)!/(n-1-k)!) C(n-1,j)`.
pub fn leibniz_c_table_full_recurrence(n_max: usize) -> TriangleTable<BigRational> {
    let mut rows: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k == n {
                row.push(BigRational::zero());
                continue;
            }
            let mut acc = BigRational::zero();
            for j in 0..=k {
                let base = prev[j].clone();
                if base.is_zero() {
                    continue;
                }
                let ratio = factorial((n - 1 - j) as u64) / factorial((n - 1 - k) as u64);
                let sign = if (k - j) % 2 == 1 { -1 } else { 1 };
                let w = BigRational::new(BigInt::from(sign) * ratio, BigInt::from(2).pow((k - j) as u32));
                acc += w * base;
            }
            row.push(acc);
        }
        rows.push(row);
    }
    TriangleTable { rows }
}

/// Table `t[k][n] = T(k,n)` for `0 <= n <= k <= k_max` by
/// `T(k,n) = T(k-1,n-1) + n^2 T(k-1,n)`.
pub fn central_factorial_table(k_max: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for k in 1..=k_max {
        let prev = &t[k - 1];
        let mut row = vec![BigInt::zero(); k + 1];
        for n in 1..=k {
            let left = prev.get(n - 1).cloned().unwrap_or_default();
            let right = prev.get(n).cloned().unwrap_or_default();
            row[n] = left + BigInt::from((n * n) as u64) * right;
        }
        t.push(row);
    }
    t
}

/// Central factorial number `T(k,n)`; zero when `k < n`.
pub fn central_factorial_t(k: u64, n: u64) -> BigInt {
    if k < n {
        return BigInt::zero();
    }
    let t = central_factorial_table(k as usize);
    t[k as usize][n as usize].clone()
}

/// `T(k,n) = sum_{j=1}^{n} 2(-1)^(n+j) j^(2k) / ((n-j)!(n+j)!)` for
/// `k, n >= 1`, evaluated in exact rationals.
pub fn central_factorial_t_closed(k: u64, n: u64) -> Result<BigRational> {
    if k == 0 || n == 0 {
        return Err(Error::OutOfRange(format!("closed form needs k, n >= 1, got ({k},{n})")));
    }
    let mut acc = BigRational::zero();
    for j in 1..=n {
        let sign: i64 = if (n + j) % 2 == 1 { -1 } else { 1 };
        let num = BigInt::from(2 * sign) * BigInt::from(j).pow(2 * k as u32);
        let den = factorial(n - j) * factorial(n + j);
        acc += BigRational::new(num, den);
    }
    Ok(acc)
}

/// Implementation constant standing in for the existential `K` of the
/// growth bound on `T(k,n)`.
pub const T_GROWTH_K: f64 = 2.0;

/// Whether `T(k,n) <= K e^(2n) n^(2k-2n)` with `K = 2`, compared in log space.
pub fn t_growth_bound_check(k: u64, n: u64) -> bool {
    let t = central_factorial_t(k, n);
    if t.is_zero() {
        return true;
    }
    let ln_t = Real::from_bigint(&t, 128).ln_abs_f64();
    let nf = n as f64;
    let ln_bound = T_GROWTH_K.ln() + 2.0 * nf + (2.0 * k as f64 - 2.0 * nf) * nf.ln();
    ln_t <= ln_bound + 1e-12 * ln_bound.abs().max(1.0)
}

/// Ascending coefficients of `prod_{j<k} (x + j^2)`.
pub fn tau_poly_coeffs(k: u64) -> Vec<BigInt> {
    let mut c = vec![BigInt::one()];
    for j in 0..k {
        let s = BigInt::from(j * j);
        let mut next = vec![BigInt::zero(); c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v * &s;
            next[i + 1] += v;
        }
        c = next;
    }
    c
}

pub type IntMatrix = Vec<Vec<BigInt>>;

/// `(K+1) x (K+1)` matrix with entry `(n,k) = (-1)^k T(k,n)`, sending
/// Maclaurin coefficients to Wilson coefficients at `x0 = 0`.
pub fn maclaurin_to_wilson_matrix(k_max: usize) -> IntMatrix {
    let t = central_factorial_table(k_max);
    let mut m = vec![vec![BigInt::zero(); k_max + 1]; k_max + 1];
    for (k, row) in t.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            m[n][k] = if k % 2 == 1 { -v.clone() } else { v.clone() };
        }
    }
    m
}

/// `(K+1) x (K+1)` matrix with entry `(m,k) = (-1)^k [x^m] prod_{j<k}(x+j^2)`.
pub fn wilson_to_maclaurin_matrix(k_max: usize) -> IntMatrix {
    let mut m = vec![vec![BigInt::zero(); k_max + 1]; k_max + 1];
    for k in 0..=k_max {
        for (i, v) in tau_poly_coeffs(k as u64).into_iter().enumerate() {
            m[i][k] = if k % 2 == 1 { -v } else { v };
        }
    }
    m
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let p = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![BigInt::zero(); p]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..p {
                out[i][j] += aik * &b[k][j];
            }
        }
    }
    out
}

/// Applies an integer matrix to a rational vector (missing entries are 0).
pub fn mat_vec(a: &IntMatrix, v: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v.iter())
                .filter(|(m, _)| !m.is_zero())
                .fold(BigRational::zero(), |acc, (m, x)| acc + BigRational::from_integer(m.clone()) * x)
        })
        .collect()
}

/// Maclaurin coefficients `b_0..b_d` to Wilson coefficients at `x0 = 0`.
pub fn maclaurin_to_wilson(b: &[BigRational]) -> Vec<BigRational> {
    if b.is_empty() {
        return Vec::new();
    }
    mat_vec(&maclaurin_to_wilson_matrix(b.len() - 1), b)
}

/// Wilson coefficients at `x0 = 0` to Maclaurin coefficients.
pub fn wilson_to_maclaurin(a: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() {
        return Vec::new();
    }
    mat_vec(&wilson_to_maclaurin_matrix(a.len() - 1), a)
}

/// Exact `p/q` rendering used in reports.
pub fn rational_string(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// `true` when every entry is a non-negative integer.
pub fn is_nonnegative_integer(v: &BigRational) -> bool {
    v.is_integer() && !v.is_negative()
}

/// Greatest common divisor helper re-exported for polygon slopes.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
