//! Batch entry point. Exit codes: 0 success, 2 infeasible problem,
//! 3 penalization assumption violated, 4 validation or usage error,
//! 5 numerical failure.

use clap::error::ErrorKind;
use clap::Parser;

use cmdp::cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let mut out = String::new();
    let result = run(&cli, &mut out);
    print!("{out}");
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
