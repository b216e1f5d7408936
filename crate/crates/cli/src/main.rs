// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use output::{create, to_json, CliError, CliResult, Manifest};

fn threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var("NW_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("NW_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(flag.filter(|&n| n > 0)),
    }
}

fn verify(v: &args::Verify) -> CliResult<()> {
    let mut manifest = Manifest::start("verify");
    let grid = v.grid.unwrap_or_else(|| verify::default_grid(v.suite));
    if grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {grid}")));
    }
    manifest.config = json!({ "suite": format!("{:?}", v.suite).to_lowercase(), "grid": grid });
    let checks = verify::run(v.suite, grid)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.check.as_str()).collect();
    match v.out.first() {
        Some(path) => {
            verify::write_margins(create(path)?, &checks)?;
            manifest.record(path);
            manifest.extra = Some(json!({ "passed": failed.is_empty(), "checks": checks }));
            manifest.write(&output::sibling(path, "manifest.json"))?;
            print!("{}", to_json(&json!({ "passed": failed.is_empty(), "checks": checks }))?);
        }
        None => verify::write_margins(std::io::stdout().lock(), &checks)?,
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Series(s) => commands::series(s),
        Command::Heteroclinic(h) => commands::heteroclinic(h),
        Command::Atlas(a) => commands::atlas(a),
        Command::Boundaries(b) => commands::boundaries(b),
        Command::Simulate(s) => commands::simulate(s),
        Command::Diagnose(d) => commands::diagnose_file(d),
        Command::Verify(v) => verify(v),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
