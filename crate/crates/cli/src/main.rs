//! `eqshape`: validate finite G-space instances, compute certified
//! Arens–Eells norms, quotients, factorizations and inverse systems.
//!
//! Every command prints a JSON run report on stdout. Exit status is 0 when
//! every check passes, 1 when a check fails, and 2 on structural errors
//! (unreadable or malformed input, unknown names, refusals).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use eqshape::properties::PropertyResult;
use eqshape::Error;

#[derive(Debug, Parser)]
#[command(
    name = "eqshape",
    version,
    about = "Exact verifier for finite equivariant metric constructions"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GlobalArgs {
    /// Basepoint policy; defaults to internal when a basepoint is named.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Internal basepoint id (overrides the document's `basepoint`).
    #[arg(long, global = true)]
    basepoint: Option<String>,
    /// Comma-separated positive tube radii.
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Vec<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sampled molecules per property or bond.
    #[arg(long, global = true, default_value_t = 64)]
    samples: usize,
    /// Cross-check norms against the brute-force oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Write the artifact here instead of embedding it in the report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Molecule action used by `check`.
    #[arg(long, global = true, value_enum, default_value_t = ActionArg::Pushforward)]
    action: ActionArg,
    /// Add wall-clock time to the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Adjoined,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActionArg {
    Pushforward,
    Eq3Literal,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate every metric, group, action, pseudometric, map and molecule.
    Validate { path: PathBuf },
    /// Certified Arens–Eells norm of a named molecule.
    Norm { path: PathBuf, molecule: String },
    /// Quotient by a named pseudometric.
    Quotient {
        path: PathBuf,
        #[arg(long)]
        mu: String,
    },
    /// Factor a named map through the quotient by its pullback pseudometric.
    Factorize {
        path: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// Build and verify the inverse system (JSON by default).
    System {
        path: PathBuf,
        /// Pseudometric names to use; all by default.
        #[arg(long, value_delimiter = ',')]
        family: Vec<String>,
    },
    /// Build, verify and export the inverse system diagram (DOT by default).
    Export {
        path: PathBuf,
        #[arg(long, value_delimiter = ',')]
        family: Vec<String>,
    },
    /// Run every module's property suite against the instance.
    Check { path: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Norm { .. } => "norm",
            Command::Quotient { .. } => "quotient",
            Command::Factorize { .. } => "factorize",
            Command::System { .. } => "system",
            Command::Export { .. } => "export",
            Command::Check { .. } => "check",
        }
    }

    fn echo(&self) -> IndexMap<String, Value> {
        let mut m = IndexMap::new();
        let path = |p: &PathBuf| Value::String(p.display().to_string());
        match self {
            Command::Validate { path: p } | Command::Check { path: p } => {
                m.insert("path".into(), path(p));
            }
            Command::Norm { path: p, molecule } => {
                m.insert("path".into(), path(p));
                m.insert("molecule".into(), molecule.clone().into());
            }
            Command::Quotient { path: p, mu } => {
                m.insert("path".into(), path(p));
                m.insert("mu".into(), mu.clone().into());
            }
            Command::Factorize { path: p, map } => {
                m.insert("path".into(), path(p));
                m.insert("map".into(), map.clone().into());
            }
            Command::System { path: p, family } | Command::Export { path: p, family } => {
                m.insert("path".into(), path(p));
                m.insert("family".into(), family.clone().into());
            }
        }
        m
    }
}

impl GlobalArgs {
    fn echo(&self, into: &mut IndexMap<String, Value>) {
        let mode = self.mode.map(|m| match m {
            ModeArg::Adjoined => "adjoined",
            ModeArg::Internal => "internal",
        });
        into.insert("mode".into(), mode.into());
        into.insert("basepoint".into(), self.basepoint.clone().into());
        into.insert("radii".into(), self.radii.clone().into());
        into.insert("seed".into(), self.seed.into());
        into.insert("samples".into(), self.samples.into());
        into.insert("oracle".into(), self.oracle.into());
        into.insert(
            "action".into(),
            match self.action {
                ActionArg::Pushforward => "pushforward",
                ActionArg::Eq3Literal => "eq3-literal",
            }
            .into(),
        );
        into.insert(
            "format".into(),
            self.format
                .map(|f| match f {
                    FormatArg::Dot => "dot",
                    FormatArg::Json => "json",
                })
                .into(),
        );
        into.insert(
            "out".into(),
            self.out.as_ref().map(|p| p.display().to_string()).into(),
        );
    }
}

#[derive(Debug, Serialize)]
struct ErrorDoc {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
    message: String,
}

impl ErrorDoc {
    fn new(e: &Error) -> Self {
        let (field, line, column) = match e {
            Error::Field { field, .. } => (Some(field.clone()), None, None),
            Error::Parse { line, column, .. } => (None, Some(*line), Some(*column)),
            _ => (None, None, None),
        };
        let message = match e {
            Error::Field { message, .. } | Error::Parse { message, .. } => message.clone(),
            other => other.to_string(),
        };
        ErrorDoc {
            kind: e.kind(),
            field,
            line,
            column,
            message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Serialize)]
struct RunReport {
    command: &'static str,
    args: IndexMap<String, Value>,
    outcome: Outcome,
    checks: Vec<PropertyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

/// What a command produced.
pub enum Artifact {
    Json(Value),
    Text(String),
}

impl Artifact {
    fn into_text(self) -> String {
        match self {
            Artifact::Json(v) => {
                let mut s = serde_json::to_string_pretty(&v).expect("serializable");
                s.push('\n');
                s
            }
            Artifact::Text(t) => t,
        }
    }

    fn into_value(self) -> Value {
        match self {
            Artifact::Json(v) => v,
            Artifact::Text(t) => Value::String(t),
        }
    }
}

/// Checks plus an optional artifact; `Err` is a structural failure.
pub type CommandOutput = Result<(Vec<PropertyResult>, Option<Artifact>), Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut args = cli.command.echo();
    cli.global.echo(&mut args);
    let name = cli.command.name();
    let output = commands::run(&cli.command, &cli.global);
    let mut report = RunReport {
        command: name,
        args,
        outcome: Outcome::Pass,
        checks: Vec::new(),
        result: None,
        artifact: None,
        error: None,
        timing_ms: None,
    };
    let mut raw_stdout = None;
    match output {
        Ok((checks, artifact)) => {
            report.outcome = if checks.iter().all(|c| c.passed) {
                Outcome::Pass
            } else {
                Outcome::Fail
            };
            report.checks = checks;
            if let Some(a) = artifact {
                if let Some(path) = &cli.global.out {
                    if let Err(e) = std::fs::write(path, a.into_text()) {
                        report.outcome = Outcome::Error;
                        report.error = Some(ErrorDoc {
                            kind: "io",
                            field: Some("out".into()),
                            line: None,
                            column: None,
                            message: e.to_string(),
                        });
                    } else {
                        report.artifact = Some(path.display().to_string());
                    }
                } else if matches!(cli.command, Command::Export { .. }) {
                    raw_stdout = Some(a.into_text());
                } else {
                    report.result = Some(a.into_value());
                }
            }
        }
        Err(e) => {
            if let Some(r) = e.report() {
                report.outcome = Outcome::Fail;
                report.checks = commands::checks_from_report(e.kind(), r);
            } else {
                report.outcome = Outcome::Error;
            }
            eprintln!("eqshape {name}: {e}");
            report.error = Some(ErrorDoc::new(&e));
        }
    }
    if cli.global.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    match raw_stdout {
        Some(artifact) => {
            print!("{artifact}");
            eprint!("{text}");
        }
        None => print!("{text}"),
    }
    match report.outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::Fail => ExitCode::from(1),
        Outcome::Error => ExitCode::from(2),
    }
}
