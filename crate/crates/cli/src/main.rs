use std::process::ExitCode;

use clap::Parser;
use locdiv_cli::{init_threads, run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = init_threads().and_then(|_| run(cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("locdiv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
