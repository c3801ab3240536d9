//! Command-line front end.
//!
//! Every subcommand reads a TOML [`ExperimentConfig`]; `--seed`,
//! `--workers`, `--out-dir` and `--format` override the file. Exit codes:
//! 0 success, 2 invalid configuration, 3 failure while computing, 4 a
//! bracket violation under `bracket-check --expect-vanish`.

mod commands;
mod config;
mod diag;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{Outcome, RunContext, Writer};
pub use config::{
    BracketCheckConfig, Coupling, ExperimentConfig, Format, InitialConfig, LoadedConfig, LyapunovRunConfig, Needs,
    OutputConfig, PoincareConfig, RunConfig, ShellConfig, System, SystemConfig, SCHEMA_VERSION,
};
pub use diag::{codes, CliError, Diagnostic, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, EXIT_VIOLATION};

#[derive(Debug, Parser)]
#[command(name = "clfermi", version, about = "Classical limits of quadratic lattice Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poisson brackets of H and the candidate constants over random states.
    BracketCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Exit with status 4 if any bracket exceeds the threshold.
        #[arg(long)]
        expect_vanish: bool,
    },
    /// Integrate the reduced three-site flow.
    Integrate(CommonArgs),
    /// Surface of section with curve/area classification.
    Poincare(CommonArgs),
    /// Largest Lyapunov exponents.
    Lyapunov(CommonArgs),
    /// Grid points of a three-dimensional slice near the energy shell.
    Shell(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format; repeat for several.
    #[arg(long, value_enum)]
    format: Vec<Format>,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(out) => out.exit,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let (common, expect_vanish) = match &cli.command {
        Command::BracketCheck { common, expect_vanish } => (common, *expect_vanish),
        Command::Integrate(c) | Command::Poincare(c) | Command::Lyapunov(c) | Command::Shell(c) => (c, false),
    };
    let loaded = LoadedConfig::load(&common.config)?;
    let cfg = &loaded.config;
    let workers = common.workers.or(cfg.workers);
    if workers == Some(0) {
        return Err(Diagnostic::new(codes::PARAMETER, "workers must be at least 1").field("workers").into());
    }
    let formats = if common.format.is_empty() { cfg.output.formats.clone() } else { common.format.clone() };
    if formats.is_empty() {
        return Err(Diagnostic::new(codes::FORMAT, "no output format selected").field("output.formats").into());
    }
    let out_dir = match &common.out_dir {
        Some(d) => d.clone(),
        None if cfg.output.dir.is_relative() => {
            loaded.path.parent().unwrap_or(std::path::Path::new(".")).join(&cfg.output.dir)
        }
        None => cfg.output.dir.clone(),
    };
    let ctx = RunContext { seed: common.seed.unwrap_or(cfg.seed), out_dir, formats };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Runtime(crate::Error::Validation(e.to_string())))?;
    pool.install(|| match &cli.command {
        Command::BracketCheck { .. } => commands::bracket_check(&loaded, &ctx, expect_vanish),
        Command::Integrate(_) => commands::integrate_cmd(&loaded, &ctx),
        Command::Poincare(_) => commands::poincare_cmd(&loaded, &ctx),
        Command::Lyapunov(_) => commands::lyapunov_cmd(&loaded, &ctx),
        Command::Shell(_) => commands::shell_cmd(&loaded, &ctx),
    })
}
