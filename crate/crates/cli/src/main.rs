use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mopr::io::Format;
use mopr::{parse_rational, Rational};
use mopr_cli::{exit_code, run, Command, FreeSpec, JobConfig, DIGITS_ENV};

#[derive(Parser)]
#[command(name = "mopr", version, about = "Recurrence coefficients of multiple orthogonal polynomials")]
struct Cli {
    /// Significant digits for decimal output.
    #[arg(long, global = true, env = DIGITS_ENV, default_value_t = mopr::DEFAULT_DIGITS)]
    digits: u32,
    /// Output file format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Cmd {
    /// Step-line coefficients to nearest-neighbor coefficients and marginals.
    Forward {
        #[arg(long)]
        stepline: PathBuf,
        /// Seed c_0 of the second-direction shift.
        #[arg(long, value_parser = rational, conflicts_with_all = ["m0", "m1"])]
        c00: Option<Rational>,
        /// Mass of the second measure.
        #[arg(long, value_parser = rational, requires = "m1")]
        m0: Option<Rational>,
        /// First moment of the second measure.
        #[arg(long, value_parser = rational, requires = "m0")]
        m1: Option<Rational>,
        #[arg(long)]
        max_len: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Marginal coefficients to nearest-neighbor and step-line coefficients.
    Inverse {
        /// One file per measure, in order.
        #[arg(long = "marginal", required = true)]
        marginals: Vec<PathBuf>,
        #[arg(long)]
        max_len: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Forward and inverse pipelines on a generated pair of measures.
    Roundtrip {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Marginal coefficients for the Bessel pair.
    Bessel {
        #[arg(long, value_parser = rational, default_value = "0")]
        alpha: Rational,
        #[arg(long, value_parser = rational, default_value = "0")]
        nu: Rational,
        #[arg(long, default_value_t = 10)]
        rows: usize,
        /// Write a JSON or CSV table instead of printing text.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the inverse sweep with the moment oracle over many seeds.
    Verify {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Three-term recurrence of a discrete measure file.
    Marginal {
        #[arg(long)]
        measure: PathBuf,
        /// Measure number recorded in the output.
        #[arg(long, default_value_t = 1)]
        id: usize,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config(cli: Cli) -> JobConfig {
    let mut format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    let command = match cli.command {
        Cmd::Forward { stepline, c00, m0, m1, max_len, out_dir } => {
            let free = match (c00, m0, m1) {
                (Some(c), _, _) => Some(FreeSpec::Seed(c)),
                (None, Some(m0), Some(m1)) => Some(FreeSpec::Moments { m0, m1 }),
                _ => None,
            };
            Command::Forward { stepline, free, max_len, out_dir }
        }
        Cmd::Inverse { marginals, max_len, out_dir } => Command::Inverse { marginals, max_len, out_dir },
        Cmd::Roundtrip { seed, max_len } => Command::Roundtrip { seed, max_len },
        Cmd::Bessel { alpha, nu, rows, out } => {
            if let Some(p) = &out {
                format = Format::from_path(p);
            }
            Command::Bessel { alpha, nu, rows, out }
        }
        Cmd::Verify { seeds, first_seed, r, max_len } => Command::Verify { seeds, first_seed, r, max_len },
        Cmd::Marginal { measure, id, len, out } => Command::Marginal { measure, id, len, out },
    };
    JobConfig { command, digits: cli.digits, format }
}

fn main() -> ExitCode {
    let cfg = config(Cli::parse());
    let mut stdout = std::io::stdout().lock();
    match run(&cfg, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
