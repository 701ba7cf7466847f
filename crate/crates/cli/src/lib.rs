//! `spsolve` command-line front end: configuration, runs, and CSV/Markdown
//! output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use config::{Cli, CommandKind, RunConfig};
use error::{CliError, CliResult};

/// Runs a validated configuration and returns the files written. A ground
/// state that fails to converge still has its outputs written before the
/// convergence error is returned.
pub fn execute(cfg: &RunConfig) -> CliResult<Vec<std::path::PathBuf>> {
    output::preflight(&cfg.out)?;
    let hash = cfg.hash();
    match cfg.command {
        CommandKind::Eigen => output::emit_eigen(cfg, &commands::run_eigen(cfg)?, &hash),
        CommandKind::Ground => {
            let run = commands::run_ground(cfg)?;
            let files = output::emit_ground(cfg, &run, &hash)?;
            if !run.state.converged {
                return Err(CliError::Convergence(format!(
                    "ground state not converged after {} iterations (gradient norm {:e}, tolerance {:e})",
                    run.state.iterations, run.state.grad_norm, cfg.grad_tol
                )));
            }
            Ok(files)
        }
        CommandKind::Instanton => {
            output::emit_instanton(cfg, &commands::run_instanton(cfg)?, &hash)
        }
        CommandKind::Probe => output::emit_probe(cfg, &commands::run_probe(cfg)?, &hash),
        CommandKind::Sweep => output::emit_sweep(cfg, &commands::run_sweep(cfg)?, &hash),
    }
}

/// Full entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = config::from_cli(cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("spsolve: {e}");
            e.exit_code()
        }
    }
}
