//! `slab-spectra <command> --config <file.json> [--out dir]`.
//!
//! Exit codes: 0 on success (an undecided verdict is reported in the `unresolved` field),
//! 2 for schema or physics violations of the config, 3 for numerical failures, which also
//! write a diagnostic JSON.

pub mod commands;
pub mod config;

use crate::error::Error;
use clap::{Parser, ValueEnum};
use config::{Loaded, Violation, SCHEMA_VERSION};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Svals,
    Bc,
    KappaScan,
    Classify,
    Asymptotics,
    Evolve,
    Growth,
    #[value(name = "validate_config")]
    ValidateConfig,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Svals => "svals",
            Command::Bc => "bc",
            Command::KappaScan => "kappa-scan",
            Command::Classify => "classify",
            Command::Asymptotics => "asymptotics",
            Command::Evolve => "evolve",
            Command::Growth => "growth",
            Command::ValidateConfig => "validate_config",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "slab-spectra", version, about = "Spectral analysis of the dissipative slab transport operator")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.path`. Without either, the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    crate_version: &'static str,
    config_hash: &'a str,
    config: &'a Value,
    grid_levels: Vec<Value>,
    two_grid_deltas: BTreeMap<String, f64>,
    unresolved: Option<String>,
    result: Value,
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, text: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    Ok(p)
}

/// Prints the document, or writes it to `dir` when given.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> i32 {
    match dir {
        Some(d) => match write_file(d, name, text) {
            Ok(p) => {
                eprintln!("wrote {}", p.display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("cannot write {name}: {e}");
                EXIT_NUMERICAL
            }
        },
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}

fn schema_failure(command: Command, v: &[Violation], dir: Option<&Path>) -> i32 {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "valid": false,
        "violations": v,
    });
    for x in v {
        eprintln!("config error in `{}`: {}", x.field, x.message);
    }
    emit(dir, &format!("{}.invalid.json", command.name()), &pretty(&doc));
    EXIT_SCHEMA
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BranchCut(_) => "branch_cut",
        Error::Domain(_) => "domain",
        Error::NoConvergence(_) => "no_convergence",
        Error::Singular(_) => "singular",
        Error::Invalid(_) => "invalid",
        Error::Simulation(_) => "simulation",
    }
}

/// Runs one command; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            let v = [Violation { field: "--config".into(), message: format!("{}: {e}", args.config.display()) }];
            return schema_failure(args.command, &v, args.out.as_deref());
        }
    };
    let parsed = config::parse(&text);
    let out_dir: Option<PathBuf> = args
        .out
        .clone()
        .or_else(|| parsed.as_ref().ok().and_then(|(c, _)| c.output.path.clone().map(PathBuf::from)));
    let dir = out_dir.as_deref();
    let loaded = match config::load(&text) {
        Ok(l) => l,
        Err(v) => return schema_failure(args.command, &v, dir),
    };
    if args.command == Command::ValidateConfig {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": args.command.name(),
            "valid": true,
            "violations": [],
            "config_hash": loaded.hash,
            "config": loaded.canonical,
            "admissible_delta": crate::spectra::admissible_delta(&loaded.grid, &loaded.collision, loaded.config.c_n),
            "k_eigenvalues": loaded.collision.k_eigenvalues(),
        });
        return emit(dir, "validate_config.json", &pretty(&doc));
    }
    match dispatch(args.command, &loaded) {
        Ok(o) => {
            let rep = Report {
                schema_version: SCHEMA_VERSION,
                command: args.command.name(),
                crate_version: env!("CARGO_PKG_VERSION"),
                config_hash: &loaded.hash,
                config: &loaded.canonical,
                grid_levels: o.levels,
                two_grid_deltas: o.deltas,
                unresolved: o.unresolved,
                result: o.result,
            };
            if let Some(u) = &rep.unresolved {
                eprintln!("unresolved: {u}");
            }
            let mut code = emit(dir, &format!("{}.json", args.command.name()), &pretty(&rep));
            if let (Some(d), Some(csv), true) = (dir, o.csv, loaded.config.output.csv) {
                code = code.max(emit(Some(d), &format!("{}.csv", args.command.name()), &csv));
            }
            code
        }
        Err(Error::Invalid(m)) => {
            let field = m.split(':').next().unwrap_or("").trim().to_string();
            schema_failure(args.command, &[Violation { field, message: m }], dir)
        }
        Err(e) => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": args.command.name(),
                "config_hash": loaded.hash,
                "config": loaded.canonical,
                "error": { "kind": error_kind(&e), "message": e.to_string() },
            });
            eprintln!("numerical failure: {e}");
            emit(dir, &format!("{}.diagnostic.json", args.command.name()), &pretty(&doc));
            EXIT_NUMERICAL
        }
    }
}

fn dispatch(c: Command, l: &Loaded) -> crate::Result<commands::Outcome> {
    match c {
        Command::Spectrum => commands::spectrum(l),
        Command::Svals => commands::svals(l),
        Command::Bc => commands::bc(l),
        Command::KappaScan => commands::kappa_scan_cmd(l),
        Command::Classify => commands::classify(l),
        Command::Asymptotics => commands::asymptotics(l),
        Command::Evolve => commands::evolve_cmd(l),
        Command::Growth => commands::growth(l),
        Command::ValidateConfig => unreachable!("handled before dispatch"),
    }
}
