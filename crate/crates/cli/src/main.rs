//! `logratio`: fit, transform and simulate compositional regression models
//! from CSV files.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure
//! (collinearity, non-convergence, separation).

mod args;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::FitX(a) => commands::fit_x(a),
        Command::FitY(a) => commands::fit_y(a),
        Command::FitWithin(a) => commands::fit_within(a),
        Command::Transform(a) => commands::transform(a),
        Command::Varmatrix(a) => commands::varmatrix(a),
        Command::NaiveLm(a) => commands::naive_lm(a),
        Command::Simulate(a) => commands::simulate(a),
    };

    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(match f {
                Failure::Validation(_) => 1,
                Failure::Numerical(_) => 2,
            })
        }
    }
}
