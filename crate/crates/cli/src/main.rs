//! `tiltgraph`: command-line front end for the tilting and cluster-tilting
//! toolkit.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let json = cli.json;
    let result = commands::run(cli);
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(out) => {
            let text = if json { out.json.to_string() } else { out.text };
            let _ = writeln!(stdout, "{}", text.trim_end());
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = match e {
                CliError::Usage(_) => 2,
                CliError::Domain(_) => 1,
            };
            if json {
                let _ = writeln!(stdout, "{}", serde_json::json!({ "error": e.to_string(), "exit": code }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
