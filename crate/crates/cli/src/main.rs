mod args;
mod commands;
mod demos;
mod doc;

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;

use args::Cli;
use doc::{CliError, Document, ErrorKind};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let err = CliError::usage(e.kind().to_string());
            print!("{}", Document::err("usage", err).render());
            return ExitCode::from(ErrorKind::Usage.exit_code() as u8);
        }
    };
    let name = cli.command.name();
    let outcome = configure(&cli).and_then(|()| commands::run(&cli.command, cli.seed));
    let (doc, code) = match outcome {
        Ok(result) => (Document::ok(name, result), 0),
        Err(err) => {
            eprintln!("error: {}", err.message);
            let code = err.kind.exit_code();
            (Document::err(name, err), code)
        }
    };
    let text = doc.render();
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(ErrorKind::Io.exit_code() as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}

fn configure(cli: &Cli) -> doc::CliResult<()> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::usage(format!("--tol must be positive and finite, got {t}")));
        }
    }
    chansteer::sdp::set_default_tolerance(cli.tol);
    Ok(())
}
