//! Text formats: exact decimal numbers, function specs, difference
//! equations and Wilson series files. All numbers travel as strings.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::combinatorics::rational_string;
use crate::diffeq::{NewtonPolygon, WilsonDifferenceEquation};
use crate::error::{Error, Result};
use crate::numerics::{Complex, PrecisionPolicy, Real};
use crate::series::{Builtin, EntireFunctionSpec, Expansion, WilsonSeries};

/// Largest decimal exponent accepted by [`parse_decimal`].
pub const MAX_EXPONENT: i64 = 4096;
/// Longest digit string accepted by [`parse_decimal`].
pub const MAX_DIGITS: usize = 4096;

fn bad(column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line: 1, column, message: message.into() }
}

fn digits(s: &str, start: usize, what: &str) -> Result<BigInt> {
    if s.is_empty() {
        return Err(bad(start + 1, format!("expected digits in {what}")));
    }
    if s.len() > MAX_DIGITS {
        return Err(bad(start + 1, format!("{what} longer than {MAX_DIGITS} digits")));
    }
    if let Some(i) = s.bytes().position(|b| !b.is_ascii_digit()) {
        return Err(bad(start + i + 1, format!("unexpected character {:?} in {what}", s[i..].chars().next().unwrap())));
    }
    Ok(s.parse().expect("ascii digits"))
}

/// Parses `[+-]digits[.digits][e[+-]digits]` or `[+-]p/q` exactly.
/// Columns in errors are 1-based offsets into `s`.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let (neg, body, off) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..], 1),
        Some(b'+') => (false, &s[1..], 1),
        Some(_) => (false, s, 0),
        None => return Err(bad(1, "empty number")),
    };
    let value = if let Some(slash) = body.find('/') {
        let p = digits(&body[..slash], off, "numerator")?;
        let q = digits(&body[slash + 1..], off + slash + 1, "denominator")?;
        if q.is_zero() {
            return Err(bad(off + slash + 2, "zero denominator"));
        }
        BigRational::new(p, q)
    } else {
        let (mant, exp, exp_off) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..]), off + i + 1),
            None => (body, None, 0),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad(off + 1, "expected digits"));
        }
        let all = format!("{int_part}{frac_part}");
        let m = digits(&all, off, "mantissa").map_err(|e| match e {
            Error::Parse { column, message, .. } => {
                let shift = if column > off + int_part.len() { 1 } else { 0 };
                bad(column + shift, message)
            }
            other => other,
        })?;
        let mut e10: i64 = -(frac_part.len() as i64);
        if let Some(es) = exp {
            let (eneg, ebody, eo) = match es.as_bytes().first() {
                Some(b'-') => (true, &es[1..], 1),
                Some(b'+') => (false, &es[1..], 1),
                _ => (false, es, 0),
            };
            if ebody.len() > 6 {
                return Err(bad(exp_off + eo + 1, "exponent out of range"));
            }
            let ev = digits(ebody, exp_off + eo, "exponent")?;
            let ev: i64 = ev.try_into().map_err(|_| bad(exp_off + 1, "exponent out of range"))?;
            if ev > MAX_EXPONENT {
                return Err(bad(exp_off + 1, format!("exponent beyond {MAX_EXPONENT}")));
            }
            e10 += if eneg { -ev } else { ev };
        }
        if e10.abs() > MAX_EXPONENT + MAX_DIGITS as i64 {
            return Err(bad(exp_off.max(1), "exponent out of range"));
        }
        let ten = BigInt::from(10);
        if e10 >= 0 {
            BigRational::from_integer(m * ten.pow(e10 as u32))
        } else {
            BigRational::new(m, ten.pow((-e10) as u32))
        }
    };
    Ok(if neg { -value } else { value })
}

/// A rational number read from a JSON string, or from a JSON integer.
#[derive(Clone, Debug, PartialEq)]
pub struct Decimal(pub BigRational);

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Decimal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal string such as \"1.25\" or \"-3/7\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Decimal, E> {
                parse_decimal(v).map(Decimal).map_err(|e| E::custom(format!("invalid number {v:?}: {e}")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Decimal, E> {
                Ok(Decimal(BigRational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Decimal, E> {
                Ok(Decimal(BigRational::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

fn values(v: &[Decimal]) -> Vec<BigRational> {
    v.iter().map(|d| d.0.clone()).collect()
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Maclaurin,
    Wilson,
    Builtin,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionSpecFile {
    kind: Kind,
    #[serde(default)]
    coeffs: Vec<Decimal>,
    x0: Option<(Decimal, Decimal)>,
    gamma: Option<Decimal>,
    lambda: Option<Decimal>,
    name: Option<String>,
    tail_bound: Option<Decimal>,
}

fn semantic(message: impl Into<String>) -> Error {
    Error::Parse { line: 0, column: 0, message: message.into() }
}

/// Reads a function spec:
/// `{"kind": "maclaurin" | "wilson" | "builtin", "coeffs": [...], "x0": [re, im],
///   "name": ..., "gamma": ..., "lambda": ..., "tail_bound": ...}`.
pub fn parse_function_spec(text: &str) -> Result<EntireFunctionSpec> {
    let f: FunctionSpecFile = from_json(text)?;
    match f.kind {
        Kind::Maclaurin => {
            if f.coeffs.is_empty() {
                return Err(semantic("maclaurin spec needs coeffs"));
            }
            Ok(EntireFunctionSpec::Maclaurin { coeffs: values(&f.coeffs), tail_bound: f.tail_bound.map(|d| d.0) })
        }
        Kind::Wilson => {
            if f.coeffs.is_empty() {
                return Err(semantic("wilson spec needs coeffs"));
            }
            let x0 = f.x0.map_or((BigRational::zero(), BigRational::zero()), |(a, b)| (a.0, b.0));
            Ok(EntireFunctionSpec::Wilson { x0, coeffs: values(&f.coeffs) })
        }
        Kind::Builtin => {
            let name = f.name.ok_or_else(|| semantic("builtin spec needs a name"))?;
            let lambda = || -> Result<(BigRational, BigRational)> {
                let l = f.lambda.clone().map_or_else(BigRational::one, |d| d.0);
                if l.is_zero() {
                    return Err(semantic("lambda must be nonzero"));
                }
                Ok((l, BigRational::zero()))
            };
            let b = match name.as_str() {
                "factorial_power" => {
                    let gamma = f.gamma.ok_or_else(|| semantic("factorial_power needs gamma"))?.0;
                    if gamma <= BigRational::zero() || gamma > BigRational::from_integer(64.into()) {
                        return Err(semantic("factorial_power needs 0 < gamma <= 64"));
                    }
                    Builtin::FactorialPower { gamma }
                }
                "polynomial" => {
                    if f.coeffs.is_empty() {
                        return Err(semantic("polynomial needs coeffs"));
                    }
                    Builtin::Polynomial(values(&f.coeffs))
                }
                "bessel_eigen_1" => Builtin::BesselEigen1 { lambda: lambda()? },
                "bessel_eigen_2" => Builtin::BesselEigen2 { lambda: lambda()? },
                "gamma_reciprocal_sum" => Builtin::GammaReciprocalSum,
                other => return Err(semantic(format!("unknown builtin {other:?}"))),
            };
            Ok(EntireFunctionSpec::Builtin(b))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EquationFile {
    order: usize,
    coeffs: Vec<Vec<Decimal>>,
}

/// Reads `{"order": n, "coeffs": [[c00, c01, ...], ...]}` where row `k`
/// holds `a_k` in ascending powers of `x`.
pub fn parse_equation(text: &str) -> Result<WilsonDifferenceEquation> {
    let f: EquationFile = from_json(text)?;
    if f.coeffs.len() != f.order + 1 {
        return Err(semantic(format!("order {} needs {} coefficient rows, found {}", f.order, f.order + 1, f.coeffs.len())));
    }
    WilsonDifferenceEquation::new(f.coeffs.iter().map(|r| values(r)).collect())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PolygonFile {
    pub points: Vec<[i64; 2]>,
    pub hull: Vec<[i64; 2]>,
    pub slopes: Vec<String>,
    pub predicted_orders: Vec<String>,
    pub admissible: Vec<String>,
}

impl From<&NewtonPolygon> for PolygonFile {
    fn from(p: &NewtonPolygon) -> Self {
        let s = |v: &[BigRational]| v.iter().map(rational_string).collect();
        Self {
            points: p.points.iter().map(|&(a, b)| [a, b]).collect(),
            hull: p.hull_vertices.iter().map(|&(a, b)| [a, b]).collect(),
            slopes: s(&p.slopes),
            predicted_orders: s(&p.predicted_orders),
            admissible: s(&p.admissible),
        }
    }
}

/// One coefficient: a decimal string when real, `[re, im]` otherwise.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoeffText {
    Real(String),
    Complex([String; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub x0: [String; 2],
    pub precision_bits: usize,
    pub working_bits: usize,
    pub digits: usize,
    pub finite: bool,
    pub coeffs: Vec<CoeffText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<String>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Decimal digits that represent `bits` of binary precision.
pub fn digits_for_bits(bits: usize) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

fn real_text(r: &Real, digits: usize) -> String {
    r.to_decimal_string(digits)
}

impl SeriesFile {
    pub fn from_series(s: &WilsonSeries, working_bits: usize, warnings: &[String]) -> Self {
        let bits = s.precision().bits();
        let digits = digits_for_bits(bits);
        let coeffs = match s.exact() {
            Some(e) => e.iter().map(|q| CoeffText::Real(Real::from_rational(q, bits).to_decimal_string(digits))).collect(),
            None => s
                .coeffs()
                .iter()
                .map(|c| {
                    if c.im.is_zero() {
                        CoeffText::Real(real_text(&c.re, digits))
                    } else {
                        CoeffText::Complex([real_text(&c.re, digits), real_text(&c.im, digits)])
                    }
                })
                .collect(),
        };
        Self {
            x0: [real_text(&s.x0().re, digits), real_text(&s.x0().im, digits)],
            precision_bits: bits,
            working_bits,
            digits,
            finite: s.is_finite(),
            coeffs,
            exact: s.exact().map(|e| e.iter().map(rational_string).collect()),
            warnings: warnings.to_vec(),
        }
    }

    pub fn from_expansion(e: &Expansion) -> Self {
        Self::from_series(&e.series, e.working_bits, &e.warnings)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series file serializes")
    }

    /// Decimal strings of the real parts, as printed.
    pub fn real_strings(&self) -> Vec<String> {
        self.coeffs
            .iter()
            .map(|c| match c {
                CoeffText::Real(s) => s.clone(),
                CoeffText::Complex([re, _]) => re.clone(),
            })
            .collect()
    }
}

/// Reads a series file written by [`SeriesFile::to_json`].
pub fn parse_series(text: &str) -> Result<WilsonSeries> {
    let f: SeriesFile = from_json(text)?;
    let policy = PrecisionPolicy::new(f.precision_bits).map_err(|e| semantic(e.to_string()))?;
    if f.precision_bits > 1 << 16 {
        return Err(semantic("precision_bits above 65536"));
    }
    if f.coeffs.is_empty() {
        return Err(semantic("series has no coefficients"));
    }
    let bits = policy.bits();
    if let Some(exact) = &f.exact {
        let q: Vec<BigRational> = exact.iter().map(|s| parse_decimal(s)).collect::<Result<_>>()?;
        let x0_re = parse_decimal(&f.x0[0])?;
        let x0_im = parse_decimal(&f.x0[1])?;
        if !(x0_re.is_zero() && x0_im.is_zero()) {
            return Err(semantic("exact coefficients are only defined at x0 = 0"));
        }
        return Ok(WilsonSeries::from_exact(q, policy, f.finite));
    }
    let num = |s: &str| -> Result<Real> { Ok(Real::from_rational(&parse_decimal(s)?, bits)) };
    let coeffs: Vec<Complex> = f
        .coeffs
        .iter()
        .map(|c| match c {
            CoeffText::Real(s) => Ok(Complex::from_real(num(s)?)),
            CoeffText::Complex([re, im]) => Ok(Complex::new(num(re)?, num(im)?)),
        })
        .collect::<Result<_>>()?;
    let x0 = Complex::new(num(&f.x0[0])?, num(&f.x0[1])?);
    WilsonSeries::new(x0, coeffs, policy, f.finite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals() {
        assert_eq!(parse_decimal("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_decimal("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_decimal("2.5e-3").unwrap(), q(1, 400));
        assert_eq!(parse_decimal("+7").unwrap(), q(7, 1));
        assert_eq!(parse_decimal(".5").unwrap(), q(1, 2));
        assert_eq!(parse_decimal("3.").unwrap(), q(3, 1));
        assert_eq!(parse_decimal("1E2").unwrap(), q(100, 1));
    }

    #[test]
    fn decimal_errors_carry_columns() {
        let col = |s: &str| match parse_decimal(s) {
            Err(Error::Parse { column, .. }) => column,
            other => panic!("{s:?} gave {other:?}"),
        };
        assert_eq!(col(""), 1);
        assert_eq!(col("12x"), 3);
        assert_eq!(col("1.2.3"), 4);
        assert_eq!(col("1/0"), 3);
        assert_eq!(col("-"), 2);
        assert_eq!(col("1e"), 3);
        assert!(parse_decimal("1e999999").is_err());
    }

    #[test]
    fn function_specs() {
        let f = parse_function_spec(r#"{"kind": "maclaurin", "coeffs": ["0", "0", "1"]}"#).unwrap();
        assert_eq!(f.finite_maclaurin().unwrap(), vec![q(0, 1), q(0, 1), q(1, 1)]);
        let g = parse_function_spec(r#"{"kind": "builtin", "name": "factorial_power", "gamma": "4"}"#).unwrap();
        assert_eq!(g, EntireFunctionSpec::factorial_power(4));
        let b = parse_function_spec(r#"{"kind": "builtin", "name": "bessel_eigen_1", "lambda": "2"}"#).unwrap();
        assert!(matches!(b, EntireFunctionSpec::Builtin(Builtin::BesselEigen1 { .. })));
        assert!(parse_function_spec(r#"{"kind": "builtin", "name": "zeta"}"#).is_err());
    }

    #[test]
    fn json_errors_have_positions() {
        match parse_function_spec("{\n  \"kind\": \"maclaurin\",\n  \"coeffs\": [\"1\", \"x\"]\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 10);
            }
            other => panic!("{other:?}"),
        }
        match parse_equation("{\"order\": 1,\n\"coeffs\": [[1], [2]") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equations() {
        let e = parse_equation(
            r#"{"order": 2, "coeffs": [["5","16","32","64"], ["0","-16","-64","-128"], ["0","4","32","64"]]}"#,
        )
        .unwrap();
        assert_eq!(e, WilsonDifferenceEquation::gamma_counterexample());
        assert!(parse_equation(r#"{"order": 2, "coeffs": [["1"], ["1"]]}"#).is_err());
        assert!(parse_equation(r#"{"order": 1, "coeffs": [["1"], ["0"]]}"#).is_err());
    }

    #[test]
    fn series_round_trip() {
        let s = WilsonSeries::from_exact(vec![q(0, 1), q(1, 1), q(1, 3)], PrecisionPolicy::default(), true);
        let file = SeriesFile::from_series(&s, 128, &[]);
        assert_eq!(file.exact.as_ref().unwrap(), &vec!["0".to_string(), "1".into(), "1/3".into()]);
        let back = parse_series(&file.to_json()).unwrap();
        assert_eq!(back.exact().unwrap(), s.exact().unwrap());
        let c = WilsonSeries::new(
            Complex::from_f64(0.5, -1.0, 128),
            vec![Complex::from_f64(1.5, 2.0, 128), Complex::from_f64(-0.25, 0.0, 128)],
            PrecisionPolicy::default(),
            false,
        )
        .unwrap();
        let text = SeriesFile::from_series(&c, 300, &["w".into()]).to_json();
        let back = parse_series(&text).unwrap();
        for (a, b) in back.coeffs().iter().zip(c.coeffs()) {
            assert!(a.rel_diff(b, 1.0) < 1e-35);
        }
        assert!(back.x0().rel_diff(c.x0(), 1.0) < 1e-35);
    }
}
