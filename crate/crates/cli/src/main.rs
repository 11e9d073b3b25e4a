use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use keypoly_cli::{execute, out_dir, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = out_dir(&cli).and_then(|dir| {
        let out = execute(&cli)?;
        Ok((out.emit(dir.as_deref())?, out.exit_code))
    });
    match result {
        Ok((text, code)) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
