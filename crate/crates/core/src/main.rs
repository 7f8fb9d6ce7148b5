use std::process::ExitCode;

use clap::Parser;
use ultrafit::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var("ULTRAFIT_THREADS") {
        let threads = match raw.trim().parse::<usize>() {
            Ok(t) if t > 0 => t,
            _ => {
                eprintln!("error: ULTRAFIT_THREADS must be a positive integer, got '{raw}'");
                return ExitCode::from(1);
            }
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
