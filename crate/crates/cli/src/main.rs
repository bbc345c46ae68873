use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use qgamble_cli::{run, serialize, Cli, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::from_cli(Cli::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let doc = match run(&cfg) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let bytes = serialize(&doc, cfg.format);
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| format!("cannot write output {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| format!("cannot write to stdout: {e}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for m in doc.failed_checks() {
        eprintln!(
            "check failed: {} = {} (reference {:?}, tolerance {:?})",
            m.name, m.value, m.reference, m.tolerance
        );
    }
    if doc.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
