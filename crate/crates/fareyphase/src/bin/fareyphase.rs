use std::process::ExitCode;

use clap::Parser;
use fareyphase::commands;
use fareyphase::config::{Cli, RunConfig};
use fareyphase::error::{EXIT_OK, EXIT_VERIFY};
use fareyphase::output::emit;
use fareyphase::CliError;

fn run() -> Result<i32, CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            e.print()?;
            return Ok(code);
        }
    };
    let (name, args) = cli.command.split();
    let config = RunConfig::from_args(name, args)?;
    let outcome = commands::run(&config)?;
    emit(&outcome.table.render(&config)?, &config)?;
    Ok(if outcome.failed { EXIT_VERIFY } else { EXIT_OK })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fareyphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
