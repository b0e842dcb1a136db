use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod render;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version go through here too
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = commands::dispatch(cli.command, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(outcome), Ok(())) => ExitCode::from(outcome.code()),
        (Err(failure), _) => {
            eprintln!("linecast: {failure}");
            ExitCode::from(failure.code())
        }
        (Ok(_), Err(e)) => {
            eprintln!("linecast: {e}");
            ExitCode::from(4)
        }
    }
}
