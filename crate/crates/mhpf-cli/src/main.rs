use clap::error::ErrorKind;
use clap::Parser;

use mhpf_cli::{run, Cli, EXIT_INPUT_ERROR, EXIT_OK};

fn main() {
    // Usage errors are input errors (exit 1); help and version exit cleanly.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT_ERROR,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}
