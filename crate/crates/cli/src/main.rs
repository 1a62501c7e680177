mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

/// Cap the global thread pool from `RIEMANN_THREADS`.
fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("RIEMANN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("RIEMANN_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(m) = init_threads() {
        eprintln!("error: {m}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Mesh(a) => commands::mesh(a),
        Command::Verify(a) => commands::verify(a),
        Command::Limits(a) => commands::limits(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
