//! `walklab`: command-line driver for exact random-walk mixing computations.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a `verify` check
//! fails.

mod args;
mod commands;
mod emit;
mod parse;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use serde_json::Value;

use args::Cli;
use commands::Outcome;
use emit::{emit, parse_format, Context};

/// Environment variable naming the default cache directory.
const CACHE_ENV: &str = "WALKLAB_CACHE_DIR";

/// Lets a later occurrence of a flag replace an earlier one, so config-file
/// entries appended after the command line take precedence.
fn override_all(cmd: clap::Command) -> clap::Command {
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let mut cmd = cmd.args_override_self(true);
    for name in names {
        cmd = cmd.mut_subcommand(name, override_all);
    }
    cmd
}

enum Parsed {
    Run(Box<Cli>),
    Exit(ExitCode),
}

fn parse_cli(argv: &[OsString]) -> Parsed {
    let cmd = override_all(Cli::command());
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return Parsed::Exit(if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            });
        }
    };
    match Cli::from_arg_matches(&matches) {
        Ok(cli) => Parsed::Run(Box::new(cli)),
        Err(e) => {
            let _ = e.print();
            Parsed::Exit(ExitCode::from(1))
        }
    }
}

/// Flattens the parsed arguments into `key = value` pairs, with the
/// subcommand path under `command`.
fn config_echo(cli: &Cli) -> Vec<(String, String)> {
    fn walk(v: &Value, path: &mut Vec<String>, out: &mut Vec<(String, String)>) {
        if let Value::Object(map) = v {
            for (k, v) in map {
                match v {
                    Value::Object(_) => {
                        if k != "command" {
                            path.push(k.clone());
                        }
                        walk(v, path, out);
                    }
                    Value::Null => out.push((k.clone(), "none".into())),
                    Value::String(s) => out.push((k.clone(), s.clone())),
                    Value::Array(items) => {
                        let parts: Vec<String> = items
                            .iter()
                            .map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string))
                            .collect();
                        out.push((k.clone(), parts.join(";")));
                    }
                    other => out.push((k.clone(), other.to_string())),
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut out = Vec::new();
    walk(
        &serde_json::to_value(cli).expect("serializable arguments"),
        &mut path,
        &mut out,
    );
    // The seed has its own header line.
    out.retain(|(k, _)| k != "seed");
    out.insert(0, ("command".into(), path.join(" ")));
    out
}

fn main() -> ExitCode {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    let mut cli = match parse_cli(&argv) {
        Parsed::Run(c) => c,
        Parsed::Exit(code) => return code,
    };
    if let Some(path) = cli.global.config.clone() {
        let entries = match commands::read_config(&path).and_then(|t| parse::parse_config(&t)) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("walklab: error: {e}");
                return ExitCode::from(1);
            }
        };
        for (k, v) in entries {
            match v.as_str() {
                "true" => argv.push(format!("--{k}").into()),
                "false" => {}
                _ => {
                    argv.push(format!("--{k}").into());
                    argv.push(v.into());
                }
            }
        }
        cli = match parse_cli(&argv) {
            Parsed::Run(c) => c,
            Parsed::Exit(code) => return code,
        };
    }
    if cli.global.cache_dir.is_none() {
        cli.global.cache_dir = std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(Into::into);
    }
    let format = match cli.global.format.as_deref().map(parse_format).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("walklab: error: {e}");
            return ExitCode::from(1);
        }
    };
    let g = &cli.global;
    let ctx = Context {
        config: config_echo(&cli),
        seed: g.seed,
        format,
        output: g.output.clone(),
        summary: g.summary.clone(),
        progress: g.progress,
        cache_dir: g.cache_dir.clone(),
        cap: g.cap,
        time_cap: g.time_cap,
        tol: g.tol,
    };
    let result = commands::run(&ctx, &cli.command).and_then(|outcome| match outcome {
        Outcome::Done(r) => emit(&ctx, &r).map(|_| ExitCode::SUCCESS),
        Outcome::Failed(r) => emit(&ctx, &r).map(|_| ExitCode::from(2)),
    });
    match result {
        Ok(code) => {
            ctx.note("done");
            code
        }
        Err(e) => {
            eprintln!("walklab: error: {e}");
            ExitCode::from(1)
        }
    }
}
