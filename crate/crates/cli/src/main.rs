use std::process::ExitCode;

use clap::Parser;
use pseudodim_cli::{run, Cli, ExperimentConfig, RunError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ExperimentConfig::resolve(cli.command, &cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(checks) => {
            for c in &checks {
                println!("{} {}", if c.pass { "ok  " } else { "FAIL" }, c.describe());
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ RunError::Numerical(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
