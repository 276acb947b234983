use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wilson_cli::{cmd_expand, cmd_polygon, cmd_verify, cmd_wv_scan, CliError, Format, Outcome, RunConfig};
use wilson_core::numerics::PrecisionPolicy;

#[derive(Parser)]
#[command(name = "wilson", version, about = "Wilson divided differences, Wilson series and Wiman-Valiron scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wilson coefficients of a function spec
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        /// Expansion point as RE[,IM] decimal strings
        #[arg(long, default_value = "0")]
        x0: String,
    },
    /// Maximal term, central index and asymptotic checks over a radius grid
    WvScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 160)]
        n_max: usize,
        /// Series file from `expand` to scan instead of expanding the spec
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, default_value_t = 1e3)]
        rmin: f64,
        #[arg(long, default_value_t = 1e6)]
        rmax: f64,
        #[arg(long, default_value_t = 8)]
        ppd: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 4.0)]
        gamma: f64,
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
        #[arg(long, default_value_t = 9.0)]
        omega: f64,
        /// Difference orders, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1")]
        order_n: Vec<usize>,
        /// Scan functions outside the growth gate
        #[arg(long)]
        force: bool,
    },
    /// Newton polygon of a difference equation file
    Polygon {
        #[command(flatten)]
        common: Common,
    },
    /// Operator identity suites
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only these suites, comma separated
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Largest order for the leibniz and cooper suites
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long, env = "WILSON_PRECISION", default_value_t = 128)]
    precision: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn base(c: Common) -> Result<RunConfig, CliError> {
    let precision = PrecisionPolicy::new(c.precision).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(RunConfig {
        input: c.input,
        output: c.output,
        format: match c.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
        precision,
        seed: c.seed,
        ..RunConfig::default()
    })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Expand { common, n_max, x0 } => {
            let (re, im) = x0.split_once(',').unwrap_or((&x0, "0"));
            let cfg = RunConfig { n_max, x0: (re.trim().into(), im.trim().into()), ..base(common)? };
            cmd_expand(&cfg)
        }
        Command::WvScan { common, n_max, series, rmin, rmax, ppd, delta, gamma, beta, omega, order_n, force } => {
            let cfg = RunConfig {
                n_max,
                series,
                r_min: rmin,
                r_max: rmax,
                points_per_decade: ppd,
                delta,
                gamma,
                beta,
                omega,
                orders: order_n,
                force,
                ..base(common)?
            };
            cmd_wv_scan(&cfg)
        }
        Command::Polygon { common } => cmd_polygon(&base(common)?),
        Command::Verify { common, only, n } => cmd_verify(&RunConfig { only, n, ..base(common)? }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let to_stdout = match &cli.command {
        Command::Expand { common, .. }
        | Command::WvScan { common, .. }
        | Command::Polygon { common }
        | Command::Verify { common, .. } => common.output.is_none(),
    };
    match run(cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if to_stdout {
                print!("{}", out.text);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("wilson: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
