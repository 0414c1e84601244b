//! Command-line front end: config resolution, dispatch to the core library,
//! sweeps and file output.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use std::path::PathBuf;

pub use config::{parse_config, RunConfig};
pub use error::{exit, CliError};
pub use output::Artifact;

/// Runs a resolved config: computes the artifact and writes its files.
pub fn run(config: &RunConfig) -> Result<(Artifact, Vec<PathBuf>), CliError> {
    output::prepare_dir(&config.out_dir)?;
    let artifact = commands::run_job(&config.job)?;
    let paths = output::emit(&artifact, config)?;
    Ok((artifact, paths))
}

/// Full command-line behaviour; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(config::ParseFailure::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(config::ParseFailure::Cli(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if config.verbose > 0 {
        eprintln!("{}", config.to_toml());
    }
    match run(&config) {
        Ok((artifact, paths)) => {
            if !config.quiet {
                println!("{}", artifact.line);
            }
            if config.verbose > 0 {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
