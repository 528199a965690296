use std::process::ExitCode;

use clap::Parser;
use trendgate_cli::{error_json, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = anyhow::Error::msg(e.render().to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            log::debug!("{err:?}");
            eprintln!("{}", error_json(&err));
            ExitCode::FAILURE
        }
    }
}
