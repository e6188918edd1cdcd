mod args;
mod input;
mod output;
mod verbs;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use diffsetlab::Error;

use args::Cli;
use input::Usage;
use output::Session;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter { .. } | Error::InvalidDimension(_) | Error::Parse(_)) => 2,
        Some(Error::Io(_) | Error::Json(_)) => 2,
        Some(Error::ResourceLimit(_) | Error::Overflow(_)) => 4,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let verb = matches.subcommand_name().unwrap_or("").to_string();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut sess = Session::new(&verb, cli.common.seed, cli.common.out.clone());
    let result =
        verbs::dispatch(&mut sess, &cli.common, &cli.verb).and_then(|outcome| sess.finish(outcome));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
