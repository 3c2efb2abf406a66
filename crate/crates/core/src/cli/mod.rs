//! Command-line front end: `simulate`, `sweep`, `verify` and `info`.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CommandError, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY};
pub use config::{parse_config, parse_config_str, ConfigError, Frame, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "circflow", version, about = "Geodesic flows on the circle diffeomorphism group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write diagnostics.
    Simulate { config: PathBuf },
    /// Run a configuration once per inertia exponent s.
    Sweep {
        config: PathBuf,
        /// Values as s=<v1>,<v2>,...
        #[arg(long)]
        param: String,
    },
    /// Run the built-in property suite.
    Verify {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Print build, symbol table and defaults.
    Info,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FaultArg {
    SymbolTable,
}

fn load(path: &std::path::Path) -> Result<RunConfig, CommandError> {
    parse_config(path).map_err(|e| CommandError::config(format!("invalid config: {e}")))
}

fn dispatch(cli: Cli) -> Result<i32, CommandError> {
    match cli.command {
        Command::Simulate { config } => commands::simulate(&load(&config)?),
        Command::Sweep { config, param } => {
            let values = commands::parse_param(&param)?;
            commands::sweep(&load(&config)?, &values)
        }
        Command::Verify { inject_fault } => {
            let fault = inject_fault.map(|FaultArg::SymbolTable| verify::Fault::SymbolTable);
            let results = verify::run_checks(fault);
            print!("{}", verify::report(&results));
            Ok(if results.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_VERIFY
            })
        }
        Command::Info => {
            print!("{}", commands::info());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
