//! `itp`: truncated infinite tensor products from the command line.
//!
//! Every subcommand reads JSON inputs and writes JSON or CSV to `--out`
//! (stdout by default). Errors go to stderr as `{code, message, context}`;
//! validation errors exit with 2 and IO errors with 3.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use itp_core::products::{DEFAULT_BUDGET, DEFAULT_TOL};
use serde_json::json;

use crate::output::{to_json, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "itp", version, about = "Truncated infinite tensor products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify an infinite complex product; emits a JSON verdict
    ProductClassify {
        #[arg(long)]
        spec: PathBuf,
        /// Maximum number of terms examined
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two product states lie in the same sector
    SectorTest {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated overlaps for N = 1..n-max. CSV columns: N, re, im, log10_modulus
    OverlapSweep {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        /// Threshold for the first_below field of the JSON output
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Expectation values for N = 1..n-max. CSV columns: N, re, im, log10_modulus
    ExpectationSweep {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Off-diagonal density matrix entries and decoherence horizons.
    /// CSV columns: N, then abs_rho_i_j and log10_abs_rho_i_j per pair i < j
    Decohere {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Also write the horizons as JSON to this path
        #[arg(long)]
        horizons_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Seeded Born-rule sampling; emits a JSON frequency table
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All-up chain against a chain with a fraction xi of sites along x.
    /// CSV columns: N, overlap, log10_overlap, probability, log10_probability
    SpinSweep {
        /// Fraction of differing sites: 1, 0.25 or 3/8
        #[arg(long)]
        xi: String,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// One seeded run of an amplification cascade; emits a JSON report
    QndSim {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-stage CSV: stage, name, count, cumulative_dof, off_diagonal, off_diagonal_log10
        #[arg(long)]
        stages_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> CliResult<()> {
    use commands::*;
    match cmd {
        Command::ProductClassify { spec, budget, tol, out } => product_classify(&spec, budget, tol, out.as_deref()),
        Command::SectorTest { a, b, out } => sector_test(&a, &b, out.as_deref()),
        Command::OverlapSweep {
            a,
            b,
            n_max,
            eps,
            out,
            format,
        } => overlap_sweep_cmd(&a, &b, n_max, eps, out.as_deref(), format),
        Command::ExpectationSweep {
            op,
            state,
            n_max,
            eps,
            out,
            format,
        } => expectation_sweep_cmd(&op, &state, n_max, eps, out.as_deref(), format),
        Command::Decohere {
            model,
            n_max,
            eps,
            horizons_out,
            out,
            format,
        } => decohere(&model, n_max, eps, horizons_out.as_deref(), out.as_deref(), format),
        Command::Sample {
            model,
            shots,
            seed,
            out,
        } => sample(&model, shots, seed, out.as_deref()),
        Command::SpinSweep { xi, n_max, out, format } => spin_sweep_cmd(&xi, n_max, out.as_deref(), format),
        Command::QndSim {
            spec,
            seed,
            stages_out,
            out,
        } => qnd_sim(&spec, seed, stages_out.as_deref(), out.as_deref()),
    }
}

fn parse_error(e: &clap::Error) -> CliError {
    let detail = e.render().to_string();
    CliError::usage(e.kind().to_string(), json!({ "detail": detail.trim_end() }))
}

fn fail(err: CliError) -> ExitCode {
    eprint!("{}", to_json(&err.report()));
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(parse_error(&e)),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
