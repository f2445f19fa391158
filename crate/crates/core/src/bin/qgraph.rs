use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qgraph_core::cli::{run, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(outcome) => {
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &outcome.artifact),
                None => std::io::stdout().write_all(outcome.artifact.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("qgraph: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("qgraph: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
