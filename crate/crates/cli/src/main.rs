#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod demo;
mod output;

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::Cli;
use output::{CliError, Run};

/// Appends `--key value` for every entry of the `--config` JSON object whose
/// flag is not already on the command line, so explicit flags win.
fn merge_config(args: &mut Vec<String>) -> Result<(), CliError> {
    let Some(path) = args.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--config=").map(str::to_string).or_else(|| (a == "--config").then(|| args.get(i + 1).cloned()).flatten())
    }) else {
        return Ok(());
    };
    let text = output::read_to_string(std::path::Path::new(&path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    let serde_json::Value::Object(map) = value else {
        return Err(CliError::Data(format!("{path}: config must be a JSON object")));
    };
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let text = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(true) => {
                args.push(flag);
                continue;
            }
            serde_json::Value::Bool(false) | serde_json::Value::Null => continue,
            other => return Err(CliError::Data(format!("{path}: unsupported value for '{key}': {other}"))),
        };
        args.push(format!("{flag}={text}"));
    }
    Ok(())
}

fn fresh_seed() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u128(std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos()));
    h.finish()
}

fn run(mut args: Vec<String>) -> Result<(), CliError> {
    merge_config(&mut args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let _ = e.print();
            return Err(CliError::Usage(String::new()));
        }
    };
    let explicit = commands::common(&cli.command).seed;
    let seed = match explicit {
        None if commands::is_stochastic(&cli.command) => {
            let s = fresh_seed();
            eprintln!("seed: {s}");
            Some(s)
        }
        s => s,
    };
    let run = Run::new(&args[1..], seed);
    commands::dispatch(cli.command, &run)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
