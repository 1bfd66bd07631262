use std::process::ExitCode;

use clap::Parser;
use zygjet::cli::{execute, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match execute(&config) {
        Ok(outcome) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("writing {}: {e}", path.display())),
                None => {
                    print!("{}", outcome.body);
                    Ok(())
                }
            };
            if let Err(msg) = written {
                eprintln!("{}", serde_json::json!({ "error": msg }));
                return ExitCode::from(2);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            ExitCode::from(2)
        }
    }
}
