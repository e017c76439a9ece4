use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use covseg_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap defaults to 2 for usage errors; 2 is reserved for failed verification.
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .lock()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(message) = written {
        eprintln!("error: {message}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(outcome.code as u8)
}
