use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use szego_cli::commands::{self, CliError};
use szego_cli::config::RunConfig;

/// Solver and validation toolkit for the cubic Szego equation on the line.
#[derive(Parser)]
#[command(name = "szego", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Parser)]
struct RunArgs {
    /// JSON run configuration (see config.schema.json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the flow through the explicit formula on the boundary grid.
    Solve(RunArgs),
    /// Run the pseudospectral disk integrator and sample it on the grid.
    Integrate(RunArgs),
    /// Run both backends and report their discrepancy per time.
    Compare(RunArgs),
    /// Emit conserved-quantity reports from both backends.
    Invariants(RunArgs),
    /// Run the contraction/Cayley audit.
    Audit(RunArgs),
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let args = match command {
        Command::Solve(a)
        | Command::Integrate(a)
        | Command::Compare(a)
        | Command::Invariants(a)
        | Command::Audit(a) => a,
    };
    let (config, raw) = RunConfig::load(&args.config)?;
    match command {
        Command::Solve(_) => {
            commands::cmd_solve(&config, &raw, &args.out)?;
        }
        Command::Integrate(_) => {
            commands::cmd_integrate(&config, &raw, &args.out)?;
        }
        Command::Compare(_) => {
            commands::cmd_compare(&config, &raw, &args.out)?;
        }
        Command::Invariants(_) => {
            commands::cmd_invariants(&config, &raw, &args.out)?;
        }
        Command::Audit(_) => {
            commands::cmd_audit(&config, &raw, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = szego_cli::init_thread_pool() {
        eprintln!("{}", serde_json::json!({ "error": msg, "exit_code": 2 }));
        return ExitCode::from(2);
    }
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.diagnostic_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
