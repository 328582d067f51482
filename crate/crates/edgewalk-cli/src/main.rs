use std::process::ExitCode;

use edgewalk_cli::{parse_config, run_command, CliError};

fn main() -> ExitCode {
    let code = match parse_config(std::env::args_os()).and_then(|(spec, cfg)| run_command(&spec, &cfg)) {
        Ok(code) => code,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
