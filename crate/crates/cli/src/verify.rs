//! Identity suites run by `wilson verify`.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wilson_core::diffeq::{
    counterexample_identities, eigen_check, equation_residual, gamma_reciprocal_sum_handle, newton_polygon,
    WilsonDifferenceEquation,
};
use wilson_core::numerics::{lattice_point, Complex, PrecisionPolicy};
use wilson_core::operators::{
    apply_aw, apply_dw, apply_dw_iterated, commutator_residual, cooper_dw_n, leibniz_dw_n, quotient_dw, FunctionHandle,
};
use wilson_core::series::{coefficient_via_differences, expand_wilson, tau_eval, EntireFunctionSpec};
use wilson_core::Result;

pub const SUITES: [&str; 9] =
    ["product", "quotient", "commutator", "leibniz", "cooper", "tau", "expansion", "eigen", "counterexample"];

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub precision: PrecisionPolicy,
    pub seed: u64,
    pub points: usize,
    /// Largest order for the Leibniz and Cooper suites; `None` uses 5 and 6.
    pub n: Option<usize>,
    pub only: Option<Vec<String>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { precision: PrecisionPolicy::default(), seed: 0, points: 20, n: None, only: None }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    #[serde(serialize_with = "sci")]
    pub max_residual: f64,
    #[serde(serialize_with = "sci")]
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn sci<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.6e}"))
}

impl SuiteResult {
    fn new(name: &str, residuals: &[f64], tolerance: f64) -> Self {
        let max = residuals.iter().cloned().fold(0.0, f64::max);
        let pass = residuals.iter().all(|r| r.is_finite() && *r <= tolerance);
        Self { name: name.into(), cases: residuals.len(), max_residual: max, tolerance, pass, note: None }
    }
}

/// `|a - b| / max(|a|, |b|, |scale terms|)`.
pub fn relative(a: &Complex, b: &Complex, extra: &[&Complex]) -> f64 {
    let mut s = a.abs().to_f64().max(b.abs().to_f64());
    for t in extra {
        s = s.max(t.abs().to_f64());
    }
    if s == 0.0 {
        return 0.0;
    }
    (a - b).abs().to_f64() / s
}

/// Seeded points with real and imaginary parts in `[-20, 20]`, kept away
/// from the origin.
pub fn random_points(seed: u64, count: usize, bits: usize) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let re: f64 = rng.gen_range(-20.0..20.0);
        let im: f64 = rng.gen_range(-20.0..20.0);
        if re.hypot(im) > 1.0 {
            out.push(Complex::from_f64(re, im, bits));
        }
    }
    out
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The two test functions of the operator suites: `sum x^k/(k!)^4` and
/// `3 + x - x^2/2 + x^3/7`.
pub fn test_functions(p: PrecisionPolicy) -> (FunctionHandle, FunctionHandle) {
    let f = EntireFunctionSpec::factorial_power(4).handle(p);
    let g = EntireFunctionSpec::polynomial(vec![rat(3, 1), rat(1, 1), rat(-1, 2), rat(1, 7)]).handle(p);
    (f, g)
}

fn suite_product(pts: &[Complex], f: &FunctionHandle, g: &FunctionHandle) -> Result<SuiteResult> {
    let fg = f.product(g);
    let r = pts
        .iter()
        .map(|x| {
            let lhs = apply_dw(&fg, x)?;
            let a = &apply_dw(f, x)? * &apply_aw(g, x)?;
            let b = &apply_aw(f, x)? * &apply_dw(g, x)?;
            Ok(relative(&lhs, &(&a + &b), &[&a, &b]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult::new("product", &r, 1e-10))
}

fn suite_quotient(pts: &[Complex], f: &FunctionHandle, g: &FunctionHandle) -> Result<SuiteResult> {
    let q = f.quotient(g);
    let r = pts
        .iter()
        .map(|x| {
            let lhs = apply_dw(&q, x)?;
            let rhs = quotient_dw(f, g, x)?;
            Ok(relative(&lhs, &rhs, &[]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult::new("quotient", &r, 1e-10))
}

fn suite_commutator(pts: &[Complex], f: &FunctionHandle) -> Result<SuiteResult> {
    let r = pts
        .iter()
        .map(|x| {
            let res = commutator_residual(f, x)?;
            let scale = apply_dw_iterated(f, x, 2)?.abs().to_f64().max(f.eval(x)?.abs().to_f64());
            Ok(if scale == 0.0 { 0.0 } else { res.abs().to_f64() / scale })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult::new("commutator", &r, 1e-10))
}

fn suite_leibniz(pts: &[Complex], f: &FunctionHandle, g: &FunctionHandle, n_max: usize) -> Result<SuiteResult> {
    let fg = f.product(g);
    let mut r = Vec::new();
    for n in 1..=n_max {
        for x in pts {
            let lhs = apply_dw_iterated(&fg, x, n)?;
            let rhs = leibniz_dw_n(f, g, x, n)?;
            r.push(relative(&lhs, &rhs, &[]));
        }
    }
    Ok(SuiteResult::new("leibniz", &r, 1e-10))
}

fn suite_cooper(pts: &[Complex], f: &FunctionHandle, n_max: usize) -> Result<SuiteResult> {
    let mut r = Vec::new();
    for n in 1..=n_max {
        for x in pts {
            let a = cooper_dw_n(f, x, n)?;
            let b = apply_dw_iterated(f, x, n)?;
            r.push(relative(&a, &b, &[]));
        }
    }
    Ok(SuiteResult::new("cooper", &r, 1e-9))
}

fn suite_tau(pts: &[Complex], bits: usize, seed: u64) -> Result<SuiteResult> {
    let x0s = random_points(seed.wrapping_add(1), 3, bits);
    let p = PrecisionPolicy::new(bits)?;
    let mut r = Vec::new();
    for x0 in &x0s {
        let x0p = lattice_point(&x0.sqrt_w(), 1);
        for k in 1..=8usize {
            let base = x0.clone();
            let tk = FunctionHandle::new(format!("tau_{k}"), p, move |x| Ok(tau_eval(k, x, &base)));
            for x in pts {
                let lhs = apply_dw(&tk, x)?;
                let rhs = tau_eval(k - 1, x, &x0p).scale_f64(-(k as f64));
                r.push(relative(&lhs, &rhs, &[]));
            }
        }
    }
    Ok(SuiteResult::new("tau", &r, 1e-12))
}

fn suite_expansion(p: PrecisionPolicy) -> Result<SuiteResult> {
    let spec = EntireFunctionSpec::factorial_power(4);
    let bits = p.bits();
    let mut r = Vec::new();
    for x0 in [Complex::zero(bits), Complex::from_f64(0.75, -0.5, bits)] {
        let exp = expand_wilson(&spec, &x0, 12, p)?;
        let h = spec.handle(p);
        for (n, a) in exp.series.coeffs().iter().enumerate() {
            let via = coefficient_via_differences(&h, &x0, n)?;
            r.push(relative(&via, &a.with_bits(bits), &[]));
        }
    }
    Ok(SuiteResult::new("expansion", &r, 1e-9))
}

fn suite_eigen(bits: usize) -> Result<SuiteResult> {
    let pts: Vec<Complex> = [1.0, 4.0, 9.0, 16.0, 25.0].iter().map(|&x| Complex::from_f64(x, 0.0, bits)).collect();
    let mut r = Vec::new();
    for lambda in [1.0, 2.0] {
        let rep = eigen_check(&Complex::from_f64(lambda, 0.0, bits), &pts)?;
        for row in &rep.rows {
            r.extend([row.residual_f1, row.residual_f2, row.residual_sum]);
        }
    }
    Ok(SuiteResult::new("eigen", &r, 1e-6))
}

fn suite_counterexample(bits: usize) -> Result<SuiteResult> {
    let pts: Vec<Complex> = [1.0, 4.0, 25.0].iter().map(|&x| Complex::from_f64(x, 0.0, bits)).collect();
    let rows = counterexample_identities(&pts)?;
    let mut r: Vec<f64> = rows.iter().flat_map(|row| [row.first, row.second]).collect();
    let eq = WilsonDifferenceEquation::gamma_counterexample();
    let residual = equation_residual(&eq, &gamma_reciprocal_sum_handle(bits), &pts)?;
    let poly = newton_polygon(&eq);
    let slopes_ok = poly.slopes == vec![rat(1, 1)];
    let mut out = SuiteResult::new("counterexample", &r, 1e-8);
    r.push(residual);
    out.cases = r.len() + 1;
    out.max_residual = out.max_residual.max(residual);
    out.pass = out.pass && residual <= 1e-6 && slopes_ok;
    out.note = Some(format!("equation residual {residual:e} (tolerance 1e-6); polygon slopes {:?}", poly.slopes.iter().map(wilson_core::combinatorics::rational_string).collect::<Vec<_>>()));
    Ok(out)
}

fn selected(cfg: &VerifyConfig, name: &str) -> bool {
    cfg.only.as_ref().is_none_or(|o| o.iter().any(|s| s == name))
}

/// Runs the selected suites. A suite that aborts numerically is reported
/// as failed with the error in its note.
pub fn run_verify(cfg: &VerifyConfig) -> Vec<SuiteResult> {
    let p = cfg.precision;
    let bits = p.bits();
    let pts = random_points(cfg.seed, cfg.points, bits);
    let (f, g) = test_functions(p);
    let mut out = Vec::new();
    for name in SUITES {
        if !selected(cfg, name) {
            continue;
        }
        let res = match name {
            "product" => suite_product(&pts, &f, &g),
            "quotient" => suite_quotient(&pts, &f, &g),
            "commutator" => suite_commutator(&pts, &f),
            "leibniz" => suite_leibniz(&pts, &f, &g, cfg.n.unwrap_or(5)),
            "cooper" => suite_cooper(&pts, &f, cfg.n.unwrap_or(6)),
            "tau" => suite_tau(&pts, bits, cfg.seed),
            "expansion" => suite_expansion(p),
            "eigen" => suite_eigen(bits),
            "counterexample" => suite_counterexample(bits),
            _ => unreachable!("suite list is fixed"),
        };
        out.push(res.unwrap_or_else(|e| SuiteResult {
            name: name.into(),
            cases: 0,
            max_residual: f64::INFINITY,
            tolerance: 0.0,
            pass: false,
            note: Some(e.to_string()),
        }));
    }
    out
}
