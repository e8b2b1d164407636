mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes: 0 success, 1 internal error, 2 config parse/validation,
/// 3 spec-level error (frame solving, empty sweep), 4 numerical-quality
/// breach (leakage, step refinement), 5 static validation failure.
#[derive(Parser)]
#[command(name = "crossres", version, about = "Simulate and verify qubit-conditional bosonic operations under cross-resonant driving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print resonance bookkeeping and the recommended drive frequency.
    Resonance(CommonArgs),
    /// Static checks only: shapes, frame solvability, margins, truncation.
    Validate(CommonArgs),
    /// Run one exact-vs-target comparison and write the result.
    Simulate(CommonArgs),
    /// Run one comparison per sweep value and write a table.
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the config's `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides the config's `output.format`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Redo the propagation at half step and fail on disagreement.
    #[arg(long)]
    dt_refine: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    // oversubscription between the test/rayon threads and BLAS threads
    // only hurts here; single-thread the BLAS kernels unless overridden
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Resonance(args) => run::resonance(&args.config, args.out.as_deref(), args.format_str()),
        Command::Validate(args) => run::validate(&args.config),
        Command::Simulate(args) => {
            run::simulate(&args.config, args.out.as_deref(), args.format_str(), args.dt_refine)
        }
        Command::Sweep(args) => {
            run::sweep(&args.config, args.out.as_deref(), args.format_str(), args.dt_refine)
        }
    };
    ExitCode::from(code)
}

impl CommonArgs {
    fn format_str(&self) -> Option<&'static str> {
        self.format.map(|f| match f {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        })
    }
}
