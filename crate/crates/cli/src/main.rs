use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod units;

use commands::{Context, Report};
use config::RunConfig;
use error::{exit, CliError};

/// FDTD solver for fully anisotropic electric and magnetic media.
#[derive(Debug, Parser)]
#[command(name = "aniso-fdtd", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel passes (1 for bit-reproducible runs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Allow dense operator analysis beyond the size guard.
    #[arg(long, global = true)]
    force_size_guard: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the time loop.
    Run,
    /// Eigenvalues of the one-step update matrix.
    Eig,
    /// Convergence study against the vacuum reference.
    Converge,
    /// Stable time-step bound.
    Cfl,
    /// Build cloak materials and their 1D cut.
    Cloak,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Eig => "eig",
            Command::Converge => "converge",
            Command::Cfl => "cfl",
            Command::Cloak => "cloak",
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let ctx = Context {
        config,
        base,
        force_size_guard: cli.force_size_guard,
    };
    ctx.write_effective_config()?;
    let report = match cli.command {
        Command::Run => commands::run(&ctx),
        Command::Eig => commands::eig(&ctx),
        Command::Converge => commands::converge(&ctx),
        Command::Cfl => commands::cfl(&ctx),
        Command::Cloak => commands::cloak(&ctx),
    }?;
    ctx.write_summary(cli.command.name(), &report)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("{w}");
            }
            for l in &report.lines {
                println!("{l}");
            }
            if report.failed {
                ExitCode::from(exit::NUMERICAL)
            } else {
                ExitCode::from(exit::OK)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
