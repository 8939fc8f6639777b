use std::io::Write;

use clap::Parser;
use gg_cli::{init_threads, run, Cli, EXIT_INVALID};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    init_threads();
    let (code, body, dest) = run(&cli);
    match &dest {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &body) {
                eprintln!("cannot write {}: {e}", p.display());
                std::process::exit(EXIT_INVALID);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(body.as_bytes());
        }
    }
    std::process::exit(code);
}
