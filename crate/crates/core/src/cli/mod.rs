//! Command-line front end. Exit codes: 0 found/pass, 1 not found or failed
//! within bounds, 2 bad input.

mod commands;
mod inputs;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub const REPORT_SCHEMA: &str = "tensorlab.report/v1";

#[derive(Parser, Debug)]
#[command(name = "tensorlab", version, about = "Finite ultrafilter and tensor-pattern toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Where the JSON report goes.
    #[arg(long, global = true, default_value = "tensorlab-report.json")]
    pub report: PathBuf,
    /// Do not write the JSON report.
    #[arg(long, global = true)]
    pub no_report: bool,
    /// Do not print the summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads; results are only reproducible with 1.
    #[arg(long, global = true, env = "TENSORLAB_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exhaustive check of the ultrafilter identities on I×J (×K).
    CheckModel(commands::CheckModel),
    /// Homogeneous set for a coloring of increasing k-tuples.
    FindHomogeneous(commands::FindHomogeneous),
    /// H with every increasing k-tuple of H inside X.
    RamseyLarge(commands::RamseyLarge),
    /// Cauchy-type subsequence of a bounded sequence.
    CauchySub(commands::CauchySub),
    /// Witness for a general tensor pattern.
    PatternSearch(commands::PatternSearch),
    /// Sumset structure inside a set A.
    FindSumset(commands::FindSumset),
    /// Density estimates for a set A.
    Density(commands::Density),
    /// Iterated limit lim_n lim_m a(n,m).
    DoubleLimit(commands::DoubleLimit),
    /// Integral over the real line through iterated Riemann sums.
    Integrate(commands::Integrate),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckModel(_) => "check-model",
            Command::FindHomogeneous(_) => "find-homogeneous",
            Command::RamseyLarge(_) => "ramsey-large",
            Command::CauchySub(_) => "cauchy-sub",
            Command::PatternSearch(_) => "pattern-search",
            Command::FindSumset(_) => "find-sumset",
            Command::Density(_) => "density",
            Command::DoubleLimit(_) => "double-limit",
            Command::Integrate(_) => "integrate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Found,
    NotFound,
    Error,
}

impl Status {
    fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Found => 0,
            Status::Fail | Status::NotFound => 1,
            Status::Error => 2,
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub result: Value,
}

/// Bad input: reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub fn run(cli: &Cli) -> i32 {
    let name = cli.command.name();
    let outcome = commands::dispatch(&cli.command, &cli.global).unwrap_or_else(|e| Outcome {
        status: Status::Error,
        summary: format!("error: {}", e.0),
        result: json!({ "error": e.0 }),
    });
    let inputs = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let report = json!({
        "schema": REPORT_SCHEMA,
        "command": name,
        "inputs": inputs.get(name).cloned().unwrap_or(inputs),
        "seed": cli.global.seed,
        "workers": cli.global.workers,
        "status": outcome.status,
        "result": outcome.result,
    });
    let mut code = outcome.status.exit_code();
    if !cli.global.no_report {
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        if let Err(e) = std::fs::write(&cli.global.report, text) {
            eprintln!("error: cannot write report {}: {e}", cli.global.report.display());
            code = 2;
        }
    }
    if !cli.global.quiet {
        if outcome.status == Status::Error {
            eprintln!("{name}: {}", outcome.summary);
        } else {
            println!("{name}: {}", outcome.summary);
        }
    }
    code
}

pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
