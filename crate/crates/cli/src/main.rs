//! `htrans`: runs one experiment from a JSON config and prints a JSON report.
//!
//! Exit codes: 0 when every `pass` flag in the report is true, 1 when some
//! flag is false, 2 for configuration errors and 3 for numerical failures.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use higher_transport::Error;
use serde_json::json;

use config::{Config, Overrides};

#[derive(Parser, Debug)]
#[command(name = "htrans", version, about = "Higher parallel transport experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment configuration (JSON, see configs/schema.json).
    #[arg(long)]
    config: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every integrator step count.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Path transport along `path`.
    Holonomy(Common),
    /// Surface transport over `bigon`.
    Surface(Common),
    /// Crossed-module axioms and the interchange law.
    CheckCm(Common),
    /// Fake curvature of `(a, b)` at sampled points.
    CheckFc(Common),
    /// Forms recovered from their own transport.
    Roundtrip(Common),
    /// Holonomy of `loop` against the surface exponential of a contraction.
    Stokes(Common),
    /// BF action and its criticality on R^4.
    Bf(Common),
    /// Transgression to loop space.
    Transgress(Common),
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Holonomy(c) => ("holonomy", c),
            Command::Surface(c) => ("surface", c),
            Command::CheckCm(c) => ("check-cm", c),
            Command::CheckFc(c) => ("check-fc", c),
            Command::Roundtrip(c) => ("roundtrip", c),
            Command::Stokes(c) => ("stokes", c),
            Command::Bf(c) => ("bf", c),
            Command::Transgress(c) => ("transgress", c),
        }
    }
}

fn execute(name: &str, args: &Common) -> Result<serde_json::Value, Error> {
    let bytes = std::fs::read(&args.config)
        .map_err(|e| Error::config("", format!("cannot read {}: {e}", args.config.display())))?;
    let overrides = Overrides {
        seed: args.seed,
        steps: args.steps,
    };
    let cfg = Config::from_bytes(&bytes, overrides)?;
    cfg.check_command(name)?;
    let integrator = cfg.integrator()?;
    let fd = cfg.fd()?;
    let result = commands::run(name, &cfg)?;
    let pass = commands::all_pass(&result);
    Ok(json!({
        "command": name,
        "config_sha256": cfg.sha256(),
        "crossed_module": cfg.crossed_module()?.name(),
        "seed": cfg.seed(),
        "integrator": Config::integrator_json(&integrator),
        "fd": {"step": report::num(fd.step), "richardson": fd.richardson},
        "tolerances": cfg.tolerances().into_iter().map(|(k, v)| (k, report::num(v))).collect::<serde_json::Map<_, _>>(),
        "tool": {"name": "htrans", "version": env!("CARGO_PKG_VERSION")},
        "result": result,
        "pass": pass,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    debug_assert!(commands::COMMANDS.contains(&name));
    match execute(name, args) {
        Ok(report) => {
            let text = report::to_canonical_string(&report);
            if let Some(path) = &args.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("htrans: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            } else {
                print!("{text}");
            }
            if report["pass"].as_bool() == Some(true) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let (code, body) = match &e {
                Error::Config { pointer, message } => {
                    (2, json!({"kind": "config", "pointer": pointer, "message": message}))
                }
                other => (3, json!({"kind": "numerical", "command": name, "message": other.to_string()})),
            };
            eprint!("{}", report::to_canonical_string(&json!({ "error": body })));
            ExitCode::from(code)
        }
    }
}
