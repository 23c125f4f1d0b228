use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wiener_neumann::experiments::{self, COMMANDS, EXIT_ERROR};

/// Numerical checks for Neumann problems of weighted Ornstein-Uhlenbeck operators.
#[derive(Parser, Debug)]
#[command(name = "wiener-neumann", version)]
struct Cli {
    /// One of: ibp-check, my-check, div-check, solve, estimates, penalize,
    /// domain-norms, extension-check, ball-demo.
    command: String,
    /// Experiment configuration (wn-config/1 JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report path (wn-report/1 JSON); plot series go to the same stem with `.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_ERROR as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if !COMMANDS.contains(&cli.command.as_str()) {
        eprintln!("error: unknown command `{}`; expected one of {}", cli.command, COMMANDS.join(", "));
        return ExitCode::from(EXIT_ERROR as u8);
    }
    ExitCode::from(experiments::run(&cli.command, &cli.config, &cli.out, cli.seed) as u8)
}
