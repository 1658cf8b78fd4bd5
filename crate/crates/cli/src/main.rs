mod args;
mod census;
mod config;
mod error;
mod output;
mod predict;
mod series;
mod verify;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use jumpchamp_core::Exec;

use args::{Cli, Command, Common};
use error::CliResult;

fn exec_for(common: &Common) -> CliResult<Exec> {
    let threads = common.threads.unwrap_or(0) as usize;
    if threads == 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| error::CliError::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(Exec::Parallel)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Census(a) => census::run(&a, exec_for(&a.common)?),
        Command::Predict(a) => predict::run(&a, exec_for(&a.common)?),
        Command::Verify(a) => verify::run(&a, exec_for(&a.common)?),
        Command::Series(a) => series::run(&a, exec_for(&a.common)?),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_args(&Cli::command(), std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
