mod cli;
mod experiments;
mod inputs;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command, Format};
use dispersia::{Error, Result};
use experiments::{geometry, paths, semirel, Outcome};

const THREADS_VAR: &str = "DISPERSIA_THREADS";

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Validation(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))
}

fn dispatch(command: &Command, seed: u64) -> Result<Outcome> {
    match command {
        Command::Multipole(a) => geometry::multipole(a),
        Command::Expand(a) => geometry::expand(a),
        Command::Vdw(a) => geometry::vdw(a, seed),
        Command::Feshbach(a) => geometry::feshbach(a, seed),
        Command::Mountainpass(a) => paths::mountainpass(a, seed),
        Command::Boundpath(a) => paths::boundpath(a, seed),
        Command::Negativity(a) => paths::negativity(a, seed),
        Command::Sublevel(a) => paths::sublevel(a, seed),
        Command::Semirel(a) => semirel::run(a, seed),
    }
}

fn render(cli: &Cli, outcome: &Outcome) -> Result<Vec<u8>> {
    match cli.format {
        Format::Json => {
            let doc = json!({
                "command": cli.command.name(),
                "version": env!("CARGO_PKG_VERSION"),
                "seed": cli.seed,
                "config": cli.command,
                "passed": outcome.passed,
                "result": outcome.result,
            });
            let mut text = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Validation(e.to_string()))?;
            text.push(b'\n');
            Ok(text)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &outcome.rows {
                w.serialize(row).map_err(|e| Error::Validation(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Validation(e.to_string()))
        }
    }
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    let outcome = dispatch(&cli.command, cli.seed)?;
    emit(cli, &render(cli, &outcome)?)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("dispersia {}: property check failed", cli.command.name());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("dispersia {}: {e}", cli.command.name());
            ExitCode::from(1)
        }
    }
}
