use num_rational::BigRational;
use proptest::prelude::*;

use wilson_core::combinatorics::rational_string;
use wilson_core::numerics::{Complex, PrecisionPolicy};
use wilson_core::series::{expand_wilson, EntireFunctionSpec};
use wilson_core::spec_io::{parse_decimal, parse_equation, parse_function_spec, parse_series, SeriesFile};
use wilson_core::Error;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn column(e: Error) -> (usize, usize) {
    match e {
        Error::Parse { line, column, .. } => (line, column),
        other => panic!("not a parse error: {other}"),
    }
}

#[test]
fn decimal_forms() {
    assert_eq!(parse_decimal("1.25").unwrap(), q(5, 4));
    assert_eq!(parse_decimal("-3e-2").unwrap(), q(-3, 100));
    assert_eq!(parse_decimal("+.5").unwrap(), q(1, 2));
    assert_eq!(parse_decimal("7/21").unwrap(), q(1, 3));
    assert_eq!(parse_decimal("2E3").unwrap(), q(2000, 1));
}

#[test]
fn decimal_errors_point_at_the_culprit() {
    assert_eq!(column(parse_decimal("12x4").unwrap_err()), (1, 3));
    assert_eq!(column(parse_decimal("").unwrap_err()), (1, 1));
    assert!(parse_decimal("1/0").is_err());
    assert!(parse_decimal("1e999999999").is_err());
}

#[test]
fn json_errors_carry_line_and_column() {
    let text = "{\n  \"kind\": \"maclaurin\",\n  \"coeffs\": [\"1\",]\n}";
    let (line, col) = column(parse_function_spec(text).unwrap_err());
    assert_eq!(line, 3);
    assert!(col > 0);
    assert!(parse_function_spec(r#"{"kind": "maclaurin", "coeffs": ["1"], "extra": 1}"#).is_err());
    assert!(parse_equation(r#"{"order": 2, "coeffs": [["1"], ["1"]]}"#).is_err());
}

#[test]
fn series_file_round_trip() {
    let p = PrecisionPolicy::default();
    for x0 in [Complex::zero(128), Complex::from_f64(0.5, 1.5, 128)] {
        let exp = expand_wilson(&EntireFunctionSpec::factorial_power(4), &x0, 20, p).unwrap();
        let text = SeriesFile::from_expansion(&exp).to_json();
        let back = parse_series(&text).unwrap();
        assert_eq!(back.len(), exp.series.len());
        for (a, b) in back.coeffs().iter().zip(exp.series.coeffs()) {
            let b = b.with_bits(128);
            let d = (a - &b).abs().to_f64();
            assert!(d <= 1e-36 * b.abs().to_f64().max(1e-300), "{a} vs {b}");
        }
    }
}

#[test]
fn exact_series_round_trip() {
    let spec = parse_function_spec(r#"{"kind": "maclaurin", "coeffs": ["0", "0", "1"]}"#).unwrap();
    let exp = expand_wilson(&spec, &Complex::zero(128), 5, PrecisionPolicy::default()).unwrap();
    let file = SeriesFile::from_expansion(&exp);
    assert_eq!(file.real_strings(), vec!["0", "1", "1"]);
    let back = parse_series(&file.to_json()).unwrap();
    assert_eq!(back.exact().unwrap(), exp.series.exact().unwrap());
}

#[test]
fn series_precision_is_capped() {
    let text = r#"{"x0": ["0", "0"], "precision_bits": 1000000000000, "working_bits": 128, "digits": 40,
        "finite": true, "coeffs": ["1"], "exact": null, "warnings": []}"#;
    assert!(parse_series(text).is_err());
}

#[test]
fn fuzz_seeds_replay() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut accepted = 0;
    for (dir, parse) in [
        ("parse_decimal", (|s: &str| parse_decimal(s).is_ok()) as fn(&str) -> bool),
        ("function_spec", |s| parse_function_spec(s).is_ok()),
        ("equation_file", |s| parse_equation(s).is_ok()),
        ("series_file", |s| parse_series(s).is_ok()),
    ] {
        for entry in std::fs::read_dir(root.join(dir)).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            accepted += parse(&text) as usize;
        }
    }
    assert!(accepted >= 12, "{accepted}");
}

proptest! {
    #[test]
    fn rational_strings_parse_back(n in -1_000_000i64..1_000_000, d in 1i64..100_000) {
        let v = q(n, d);
        prop_assert_eq!(parse_decimal(&rational_string(&v)).unwrap(), v);
    }

    #[test]
    fn scientific_strings_parse_exactly(m in -999_999i64..999_999, e in -40i32..40) {
        let s = format!("{m}e{e}");
        let want = if e >= 0 {
            BigRational::from_integer(num_bigint::BigInt::from(m) * num_bigint::BigInt::from(10).pow(e as u32))
        } else {
            BigRational::new(m.into(), num_bigint::BigInt::from(10).pow((-e) as u32))
        };
        prop_assert_eq!(parse_decimal(&s).unwrap(), want);
    }

    #[test]
    fn parser_never_panics(s in "\\PC{0,40}") {
        let _ = parse_decimal(&s);
        let _ = parse_function_spec(&s);
        let _ = parse_equation(&s);
        let _ = parse_series(&s);
    }
}
