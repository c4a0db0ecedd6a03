use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use feec::commands::{self, Context, TimeDomain};
use feec::config::Format;
use feec::{parse_config, CliError};

#[derive(Parser)]
#[command(name = "feec", version, about = "Multipatch spline finite element experiments")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output].dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for convergence sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Field file format; overrides `[output].format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the conforming projections of the configured domain.
    VerifyProjection {
        /// Damage the projections before checking them, to exercise the failure path.
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Solve a stationary problem.
    Solve {
        #[arg(value_enum)]
        problem: StaticProblem,
    },
    /// Curl-curl eigenvalues nearest the configured shift.
    Eig {
        #[arg(value_enum, default_value = "curlcurl")]
        problem: EigProblem,
    },
    /// Leap-frog time-domain run.
    Run {
        #[arg(value_enum)]
        problem: TimeProblem,
    },
    /// Error table over the `[sweep]` axes.
    Convergence,
    /// Write operator matrices in Matrix Market format.
    ExportMatrices,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StaticProblem {
    Poisson,
    MaxwellTh,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EigProblem {
    Curlcurl,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TimeProblem {
    TdMaxwell,
    TdHelmholtz,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let config = parse_config(&path)?;
    let ctx = Context::new(config, cli.out, cli.format, cli.jobs);
    match cli.command {
        Command::VerifyProjection { corrupt } => commands::verify_projection(&ctx, corrupt).map(drop),
        Command::Solve { problem: StaticProblem::Poisson } => commands::solve_poisson_cmd(&ctx).map(drop),
        Command::Solve { problem: StaticProblem::MaxwellTh } => commands::solve_maxwell_cmd(&ctx).map(drop),
        Command::Eig { problem: EigProblem::Curlcurl } => commands::eig(&ctx).map(drop),
        Command::Run { problem: TimeProblem::TdMaxwell } => commands::run_time_domain(&ctx, TimeDomain::Maxwell).map(drop),
        Command::Run { problem: TimeProblem::TdHelmholtz } => {
            commands::run_time_domain(&ctx, TimeDomain::Helmholtz).map(drop)
        }
        Command::Convergence => commands::convergence(&ctx).map(drop),
        Command::ExportMatrices => commands::export_matrices(&ctx).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEEC_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
