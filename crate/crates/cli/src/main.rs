#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod repro;
mod report;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use frontlab_core::Error;

use args::Cli;

/// Exit status for an error: 2 for invalid input, 3 for numerical failure, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_domain() => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(jobs) = cli.jobs.filter(|&j| j > 0) {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match commands::dispatch(&cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.downcast_ref::<Error>().map_or("io", Error::code);
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("error: code={code} message={message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
