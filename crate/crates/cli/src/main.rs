use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qtradeoff::commands::{
    builtin_protocol, cmd_entropy, cmd_gt, cmd_reduce_dump, cmd_tradeoff_curve, cmd_verify_approx,
    cmd_verify_clean, cmd_verify_composed, cmd_verify_transmit, curve_csv, noisy_fixture, Builtin,
};
use qtradeoff::comm::{inject_noise, ProtocolSpec};
use qtradeoff::entropy::Distribution;
use qtradeoff::qsim::DEFAULT_DIM_CAP;
use qtradeoff::report::VerificationReport;

#[derive(Parser)]
#[command(name = "qtradeoff", version, about = "Exact checks of quantum communication/query tradeoffs")]
struct Cli {
    /// Maximum number of stored amplitudes.
    #[arg(long, global = true, env = "QT_DIM_CAP", default_value_t = DEFAULT_DIM_CAP)]
    cap: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Query algorithm, protocol and tradeoff for the composed inner-product function.
    VerifyComposed {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
    },
    /// Lower-bound curve and achieved points for log₂|X| = LOG_X.
    TradeoffCurve {
        #[arg(long)]
        log_x: usize,
        #[arg(long, default_value_t = 1)]
        q_min: usize,
        #[arg(long, default_value_t = 50)]
        q_max: usize,
    },
    /// Clean compilation of an exact protocol.
    VerifyClean {
        /// Builtin protocol: constant, gt4 or composed22.
        #[arg(long, conflicts_with = "file")]
        protocol: Option<String>,
        /// Protocol JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Error certificates of the approximately-clean compiler on a noisy protocol.
    VerifyApprox {
        #[arg(long, default_value_t = 0.04)]
        eps: f64,
        /// Output alphabet size of the builtin fixture (2 or 3).
        #[arg(long, default_value_t = 2, conflicts_with = "file")]
        z: usize,
        /// Exact protocol JSON file; noise of strength EPS is injected.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Input transmission through an ε-noisy protocol answering each query.
    VerifyTransmit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Smooth max-entropy of a distribution.
    Entropy {
        #[arg(long)]
        eps: f64,
        /// Comma-separated masses.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["uniform", "file"])]
        masses: Option<Vec<f64>>,
        /// Uniform distribution on this many outcomes.
        #[arg(long, conflicts_with = "file")]
        uniform: Option<usize>,
        /// JSON file `{"masses": [...]}`.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Smallest query count consistent with the ordered-search inequality.
    GtBound {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Truth tables of the ordered-search reduction.
    ReduceDump {
        #[arg(long)]
        n: usize,
        /// Comma-separated elements of S (default: all of 1..=N).
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<usize>>,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Returns the report and, for commands with tabular data, its CSV form.
fn run(cli: &Cli) -> Result<(VerificationReport, Option<String>)> {
    let cap = cli.cap;
    Ok(match &cli.command {
        Command::VerifyComposed { n, q } => (cmd_verify_composed(*n, *q, cap)?, None),
        Command::TradeoffCurve { log_x, q_min, q_max } => {
            let (r, rows) = cmd_tradeoff_curve(*log_x, *q_min..=*q_max, cap)?;
            (r, Some(curve_csv(&rows)))
        }
        Command::VerifyClean { protocol, file } => {
            let p = match (protocol, file) {
                (_, Some(f)) => ProtocolSpec::from_json(&read(f)?)?.build(cap)?,
                (Some(b), None) => builtin_protocol(b.parse::<Builtin>()?)?,
                (None, None) => bail!("give --protocol or --file"),
            };
            (cmd_verify_clean(&p, cap)?, None)
        }
        Command::VerifyApprox { eps, z, file } => {
            let p = match file {
                Some(f) => inject_noise(&ProtocolSpec::from_json(&read(f)?)?.build(cap)?, *eps)?,
                None => noisy_fixture(*z, *eps)?,
            };
            (cmd_verify_approx(&p, cap)?, None)
        }
        Command::VerifyTransmit { n, q, eps } => (cmd_verify_transmit(*n, *q, *eps, cap)?, None),
        Command::Entropy {
            eps,
            masses,
            uniform,
            file,
        } => {
            let mu = match (masses, uniform, file) {
                (Some(m), _, _) => Distribution::new(m.clone())?,
                (_, Some(k), _) => Distribution::uniform(*k)?,
                (_, _, Some(f)) => serde_json::from_str(&read(f)?)?,
                _ => bail!("give --masses, --uniform or --file"),
            };
            (cmd_entropy(&mu, *eps, cap)?, None)
        }
        Command::GtBound { n, c } => (cmd_gt(*n, *c, cap)?, None),
        Command::ReduceDump { n, s } => {
            let s = s.clone().unwrap_or_else(|| (1..=*n).collect());
            let (r, csv) = cmd_reduce_dump(*n, s, cap)?;
            (r, Some(csv))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, table) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => table.unwrap_or_else(|| report.to_csv()),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("one or more checks failed");
        ExitCode::FAILURE
    }
}
