use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use entanglers::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not worth a panic
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            ExitCode::from(code as u8)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
