mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;

/// Process exit status for each failure class.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameter values.
    Usage(String),
    /// Unreadable input, malformed records, or data the analysis cannot use.
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
        }
    }
}

impl From<seqdiff_core::Error> for Failure {
    fn from(e: seqdiff_core::Error) -> Self {
        Self::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Usage(msg) | Failure::Data(msg)) = &failure;
            eprintln!("error: {msg}");
            ExitCode::from(failure.code())
        }
    }
}
