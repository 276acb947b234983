//! Command implementations behind the `wilson` binary.

pub mod verify;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use wilson_core::diffeq::newton_polygon;
use wilson_core::numerics::{Complex, PrecisionPolicy};
use wilson_core::series::{expand_wilson, EntireFunctionSpec, WilsonSeries};
use wilson_core::spec_io::{parse_decimal, parse_equation, parse_function_spec, parse_series, PolygonFile, SeriesFile};
use wilson_core::wiman_valiron::{log_grid, summarize, wv_scan, ScanConfig, ScanSummary, WvReport};

pub use verify::{run_verify, SuiteResult, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// A series file from `expand`; skips the expansion step of a scan.
    pub series: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub r_min: f64,
    pub r_max: f64,
    pub points_per_decade: usize,
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub omega: f64,
    pub orders: Vec<usize>,
    pub n_max: usize,
    pub x0: (String, String),
    pub precision: PrecisionPolicy,
    pub seed: u64,
    pub force: bool,
    pub only: Option<Vec<String>>,
    pub n: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            series: None,
            output: None,
            format: Format::Json,
            r_min: 1e3,
            r_max: 1e6,
            points_per_decade: 8,
            delta: 1.0,
            gamma: 4.0,
            beta: 10.0,
            omega: 9.0,
            orders: vec![1],
            n_max: 160,
            x0: ("0".into(), "0".into()),
            precision: PrecisionPolicy::default(),
            seed: 0,
            force: false,
            only: None,
            n: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.r_min >= 1.0) {
            return Err(CliError::Usage(format!("--rmin must be at least 1, got {}", self.r_min)));
        }
        if !(self.r_max > self.r_min) || !self.r_max.is_finite() {
            return Err(CliError::Usage(format!("--rmax must exceed --rmin, got {}", self.r_max)));
        }
        if self.points_per_decade < 4 {
            return Err(CliError::Usage(format!("--ppd must be at least 4, got {}", self.points_per_decade)));
        }
        if !(self.omega < self.beta) {
            return Err(CliError::Usage(format!("--omega ({}) must be below --beta ({})", self.omega, self.beta)));
        }
        if !(self.delta > 0.0 && self.gamma > 0.0) {
            return Err(CliError::Usage("--delta and --gamma must be positive".into()));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(CliError::Usage("--order-n takes positive integers".into()));
        }
        Ok(())
    }

    fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            delta: self.delta,
            gamma: self.gamma,
            beta: self.beta,
            omega: self.omega,
            orders: self.orders.clone(),
            seed: self.seed,
            ..ScanConfig::default()
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
    Numeric(wilson_core::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(e) if e.is_numeric_abort() => 3,
            CliError::Numeric(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wilson_core::Error> for CliError {
    fn from(e: wilson_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

/// Result of a command: the text written, warnings for stderr, and
/// whether every check passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub warnings: Vec<String>,
    pub pass: bool,
}

fn read(path: &Option<PathBuf>, what: &str) -> Result<String, CliError> {
    let p = path.as_ref().ok_or_else(|| CliError::Usage(format!("{what} needs --input")))?;
    fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn parse_x0(x0: &(String, String), bits: usize) -> Result<Complex, CliError> {
    let re = parse_decimal(&x0.0).map_err(|e| CliError::Usage(format!("--x0: {e}")))?;
    let im = parse_decimal(&x0.1).map_err(|e| CliError::Usage(format!("--x0: {e}")))?;
    let re = wilson_core::numerics::Real::from_rational(&re, bits);
    let im = wilson_core::numerics::Real::from_rational(&im, bits);
    Ok(Complex::new(re, im))
}

/// Expands the function spec at `--input` to `a_0..a_{n_max}`.
pub fn cmd_expand(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = parse_function_spec(&read(&cfg.input, "expand")?)?;
    let x0 = parse_x0(&cfg.x0, cfg.precision.bits())?;
    let exp = expand_wilson(&spec, &x0, cfg.n_max, cfg.precision)?;
    let mut text = SeriesFile::from_expansion(&exp).to_json();
    text.push('\n');
    write_out(&cfg.output, &text)?;
    Ok(Outcome { text, warnings: exp.warnings, pass: true })
}

/// Newton polygon of the equation file at `--input`.
pub fn cmd_polygon(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eq = parse_equation(&read(&cfg.input, "polygon")?)?;
    let poly = PolygonFile::from(&newton_polygon(&eq));
    let mut text = serde_json::to_string_pretty(&poly).expect("polygon serializes");
    text.push('\n');
    write_out(&cfg.output, &text)?;
    Ok(Outcome { text, warnings: Vec::new(), pass: true })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    precision_bits: usize,
    seed: u64,
    pass: bool,
    suites: &'a [SuiteResult],
}

/// Runs the identity suites. `pass` is false if any suite fails.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(only) = &cfg.only {
        if let Some(bad) = only.iter().find(|s| !verify::SUITES.contains(&s.as_str())) {
            return Err(CliError::Usage(format!("unknown suite {bad:?}; known: {}", verify::SUITES.join(", "))));
        }
    }
    let vc = VerifyConfig { precision: cfg.precision, seed: cfg.seed, points: 20, n: cfg.n, only: cfg.only.clone() };
    let suites = run_verify(&vc);
    let pass = suites.iter().all(|s| s.pass);
    let report = VerifyReport { precision_bits: cfg.precision.bits(), seed: cfg.seed, pass, suites: &suites };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_out(&cfg.output, &text)?;
    Ok(Outcome { text, warnings: Vec::new(), pass })
}

/// One `(radius, order)` row of a scan. Numbers are decimal strings; an
/// empty field means the quantity is undefined at that radius.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScanRow {
    pub r: String,
    pub nu: String,
    pub mu: String,
    #[serde(rename = "M")]
    pub big_m: String,
    pub tau_normal: bool,
    pub tail_ratio: String,
    pub wv_residual_over_bound: String,
    #[serde(rename = "wv_residual_over_M")]
    pub wv_residual_over_m: String,
    pub wv_random_over_bound: String,
    #[serde(rename = "wv_random_over_M")]
    pub wv_random_over_m: String,
    pub order_n: String,
    pub asymptotic: bool,
    pub error: String,
}

/// Fixed-width scientific notation, so repeated runs print the same bytes.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.15e}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub fn scan_rows(reports: &[WvReport], orders: &[usize]) -> Vec<ScanRow> {
    let mut out = Vec::new();
    for rep in reports {
        for &n in orders {
            let wv = rep.wv(n);
            out.push(ScanRow {
                r: num(rep.r),
                nu: if rep.error.is_some() { String::new() } else { rep.nu.to_string() },
                mu: rep.mu.clone(),
                big_m: rep.big_m.clone(),
                tau_normal: rep.tau_normal,
                tail_ratio: opt(rep.tail.map(|t| t.ratio)),
                wv_residual_over_bound: opt(wv.map(|w| w.argmax_over_bound)),
                wv_residual_over_m: opt(wv.map(|w| w.argmax_over_m)),
                wv_random_over_bound: opt(wv.map(|w| w.random_over_bound)),
                wv_random_over_m: opt(wv.map(|w| w.random_over_m)),
                order_n: n.to_string(),
                asymptotic: rep.asymptotic,
                error: rep.error.clone().unwrap_or_default(),
            });
        }
    }
    out
}

/// Serializable form of [`ScanSummary`] with the thresholds it was judged by.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SummaryFile {
    pub function: String,
    pub precision_bits: usize,
    pub n_max: usize,
    pub seed: u64,
    pub radii: usize,
    pub errors: usize,
    pub flagged: usize,
    pub flagged_log_measure: String,
    pub order_from_nu: String,
    pub nu_fit_order: String,
    pub nu_fit_exponent: String,
    pub tail_decade_medians: Vec<[String; 2]>,
    pub tail_nonincreasing: bool,
    pub tail_final_median: String,
    pub wv_over_m_final_median: Vec<[String; 2]>,
    pub wv_over_bound_max: Vec<[String; 2]>,
    pub wv_estimate_ok: bool,
    pub mbound_ok: bool,
    pub degenerate: bool,
    pub thresholds: Thresholds,
    pub pass: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Thresholds {
    pub tail_final_median: String,
    pub wv_over_m_final_median: String,
    pub wv_over_bound: String,
    pub flagged_log_measure: String,
}

impl SummaryFile {
    fn new(s: &ScanSummary, function: String, cfg: &RunConfig, warnings: Vec<String>) -> Self {
        use wilson_core::wiman_valiron::{LOG_MEASURE_MAX, TAIL_FINAL_MEDIAN_MAX, WV_OVER_M_FINAL_MAX};
        let pairs = |v: &[(usize, f64)]| v.iter().map(|(n, x)| [n.to_string(), num(*x)]).collect();
        Self {
            function,
            precision_bits: cfg.precision.bits(),
            n_max: cfg.n_max,
            seed: cfg.seed,
            radii: s.radii,
            errors: s.errors,
            flagged: s.flagged,
            flagged_log_measure: num(s.flagged_log_measure),
            order_from_nu: opt(s.order_from_nu),
            nu_fit_order: opt(s.nu_fit.map(|f| f.0)),
            nu_fit_exponent: opt(s.nu_fit.map(|f| f.1)),
            tail_decade_medians: s.tail_medians.iter().map(|(d, m)| [d.to_string(), num(*m)]).collect(),
            tail_nonincreasing: s.tail_nonincreasing,
            tail_final_median: opt(s.tail_final_median),
            wv_over_m_final_median: pairs(&s.wv_over_m_final),
            wv_over_bound_max: pairs(&s.wv_over_bound_max),
            wv_estimate_ok: s.wv_estimate_ok,
            mbound_ok: s.mbound_ok,
            degenerate: s.degenerate,
            thresholds: Thresholds {
                tail_final_median: num(TAIL_FINAL_MEDIAN_MAX),
                wv_over_m_final_median: num(WV_OVER_M_FINAL_MAX),
                wv_over_bound: num(1.0),
                flagged_log_measure: num(LOG_MEASURE_MAX),
            },
            pass: s.pass,
            warnings,
        }
    }
}

#[derive(Serialize)]
struct ScanJson<'a> {
    summary: &'a SummaryFile,
    rows: &'a [ScanRow],
}

/// Path of the summary written next to a CSV scan.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

pub fn rows_to_csv(rows: &[ScanRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Series and handle for a scan: the `--series` file when given, else the
/// expansion of the spec at 0.
fn scan_inputs(cfg: &RunConfig, spec: &EntireFunctionSpec) -> Result<WilsonSeries, CliError> {
    if let Some(path) = &cfg.series {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let s = parse_series(&text)?;
        if !s.x0().is_zero() {
            return Err(CliError::Usage("scans need a series expanded at x0 = 0".into()));
        }
        return Ok(s.with_precision(cfg.precision));
    }
    let exp = expand_wilson(spec, &Complex::zero(cfg.precision.bits()), cfg.n_max, cfg.precision)?;
    Ok(exp.series.with_precision(cfg.precision))
}

/// Wiman-Valiron scan of the spec at `--input` over the log grid. Functions
/// outside the growth gate are refused unless `force` is set.
pub fn cmd_wv_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let spec = parse_function_spec(&read(&cfg.input, "wv-scan")?)?;
    let mut warnings: Vec<String> = spec.gate_warning().into_iter().collect();
    if !spec.admissible_for_scan() {
        if warnings.is_empty() {
            warnings.push(format!("{} is not known to be of order below 1/3", spec.label()));
        }
        if !cfg.force {
            return Err(CliError::Usage(format!("{}; rerun with --force to scan anyway", warnings.join("; "))));
        }
    }
    let s = scan_inputs(cfg, &spec)?;
    let f = spec.handle(cfg.precision);
    let radii = log_grid(cfg.r_min, cfg.r_max, cfg.points_per_decade).map_err(|e| CliError::Usage(e.to_string()))?;
    let sc = cfg.scan_config();
    let reports = wv_scan(&s, &f, &radii, &sc)?;
    let summary = summarize(&reports, &sc.orders);
    let mut sf = SummaryFile::new(&summary, spec.label(), cfg, warnings);
    sf.n_max = s.len() - 1;
    if summary.degenerate {
        sf.warnings.push("central index is constant on the grid; no asymptotic claims".into());
    } else if !reports.iter().any(|r| r.asymptotic) {
        sf.warnings.push("no radius on the grid has central index >= 16; asymptotic checks have nothing to judge".into());
    }
    let rows = scan_rows(&reports, &sc.orders);
    let mut summary_text = serde_json::to_string_pretty(&sf).expect("summary serializes");
    summary_text.push('\n');
    let mut stderr_notes = sf.warnings.clone();
    let text = match cfg.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&ScanJson { summary: &sf, rows: &rows }).expect("scan serializes");
            t.push('\n');
            write_out(&cfg.output, &t)?;
            t
        }
        Format::Csv => {
            let t = rows_to_csv(&rows)?;
            write_out(&cfg.output, &t)?;
            if let Some(p) = &cfg.output {
                write_out(&Some(sidecar_path(p)), &summary_text)?;
            } else {
                stderr_notes.push(format!("summary:\n{summary_text}"));
            }
            t
        }
    };
    Ok(Outcome { text, warnings: stderr_notes, pass: summary.pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            RunConfig { r_min: 0.5, ..RunConfig::default() },
            RunConfig { points_per_decade: 3, ..RunConfig::default() },
            RunConfig { omega: 10.0, ..RunConfig::default() },
            RunConfig { r_max: 1e3, ..RunConfig::default() },
            RunConfig { orders: vec![0], ..RunConfig::default() },
        ] {
            assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Check("x".into()).exit_code(), 1);
        assert_eq!(CliError::Numeric(wilson_core::Error::Truncation { index: 3, last_term: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Numeric(wilson_core::Error::Parse { line: 1, column: 2, message: "m".into() }).exit_code(), 2);
    }

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(num(1000.0), "1.000000000000000e3");
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/scan.csv")), PathBuf::from("out/scan.csv.summary.json"));
    }
}
