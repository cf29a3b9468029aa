use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use superadditive::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let mut ok = true;
    let stdout = std::io::stdout();
    for rendered in run(cli)? {
        match &rendered.out {
            Some(path) => {
                std::fs::write(path, &rendered.text)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            None => stdout.lock().write_all(rendered.text.as_bytes())?,
        }
        ok &= !rendered.failure;
    }
    Ok(ok)
}
