use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use prandtl_cli::{diagnostic, run, Cli, EXIT_CONFIG};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = serde_json::json!({"error": {"code": "usage", "exit": EXIT_CONFIG, "message": e.to_string()}});
            eprintln!("{msg}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(cli) {
        Ok(summary) => {
            if !summary.is_null() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let d = diagnostic(&err);
            eprintln!("{d}");
            ExitCode::from(d["error"]["exit"].as_i64().unwrap_or(1) as u8)
        }
    }
}
