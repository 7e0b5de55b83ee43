mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{expand_args, Cli};

fn main() -> ExitCode {
    let argv = match expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("covert: {e}");
            return ExitCode::from(2);
        }
    };
    // clap exits with 2 on usage errors, 0 on --help
    let cli = Cli::parse_from(argv);
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("covert: {f}");
            ExitCode::from(f.code())
        }
    }
}
