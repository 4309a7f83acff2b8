// `!(a <= b)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use wkstab::Error;

use crate::args::Cli;

const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_STRICT: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Io(_) | Error::UnknownCatalog(_) => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match commands::run(&cli.command, &cli.global) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &out.body),
        None => {
            print!("{}", out.body);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_PARSE);
    }
    for f in &out.failures {
        eprintln!("{}: {f}", if cli.global.strict || out.always_fatal { "failed" } else { "warning" });
    }
    if !out.failures.is_empty() && (cli.global.strict || out.always_fatal) {
        return ExitCode::from(EXIT_STRICT);
    }
    ExitCode::SUCCESS
}
