//! Experiment drivers behind the `wiener-neumann` binary.

pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;
use std::time::Instant;

pub use commands::{run_command, COMMANDS};
pub use config::Config;
pub use report::{CheckRecord, Outcome, Report, Series, REPORT_SCHEMA};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Runs `command` on the config at `config_path`, writes the report to `out`
/// and any plot series next to it, and returns the process exit code.
pub fn run(command: &str, config_path: &Path, out: &Path, seed: Option<u64>) -> i32 {
    match run_inner(command, config_path, out, seed) {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {} statistic {:e} > {:e}", c.name, c.statistic, c.threshold);
            }
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run_inner(command: &str, config_path: &Path, out: &Path, seed: Option<u64>) -> Result<Report, String> {
    if !COMMANDS.contains(&command) {
        return Err(format!("unknown command `{command}`"));
    }
    let text = std::fs::read_to_string(config_path).map_err(|e| format!("{}: {e}", config_path.display()))?;
    let mut cfg = Config::parse(&text).map_err(|e| e.to_string())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let start = Instant::now();
    let outcome = run_command(command, &cfg).map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    let report = Report::new(command, cfg, &outcome, wall, out);
    if let Some(series) = &outcome.series {
        series.write_csv(&report::series_path(out)).map_err(|e| e.to_string())?;
    }
    std::fs::write(out, report.to_json()).map_err(|e| format!("{}: {e}", out.display()))?;
    Ok(report)
}
