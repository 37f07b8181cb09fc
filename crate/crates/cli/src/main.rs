use std::process::ExitCode;

use clap::Parser;
use mssz_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors, matching our taxonomy
    let cli = Cli::parse();
    ExitCode::from(run(cli))
}
