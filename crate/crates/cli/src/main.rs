mod commands;
mod config;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(fracadapt::Error),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use fracadapt::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(E::Domain(_) | E::Shape { .. } | E::Unsupported(_)) => 2,
            CliError::Solver(E::NonConvergence { .. }) => 3,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Solver(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<fracadapt::Error> for CliError {
    fn from(e: fracadapt::Error) -> Self {
        CliError::Solver(e)
    }
}

/// Writes next to `path` and renames into place, so a failed run never
/// leaves a partial file.
fn write_atomic(path: &Path, data: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::Io)?;
    tmp.write_all(data.as_bytes()).map_err(CliError::Io)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn emit(output: Option<&Path>, data: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write_atomic(p, data),
        None => std::io::stdout().write_all(data.as_bytes()).map_err(CliError::Io),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mlf(args) => {
            let csv = commands::mlf_table(&args)?;
            emit(args.output.as_deref(), &csv)
        }
        Command::Run(args) => {
            let cfg = RunConfig::resolve(args)?;
            emit(cfg.output.as_deref(), &commands::run(&cfg)?)
        }
        Command::Sweep(args) => {
            let cfg = RunConfig::resolve(args)?;
            emit(cfg.output.as_deref(), &commands::sweep(&cfg)?)
        }
        Command::Bound(args) => {
            let cfg = RunConfig::resolve(args)?;
            emit(cfg.output.as_deref(), &commands::bound(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracadapt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
