//! Run configuration, provenance, and report assembly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Report schema version.
pub const SCHEMA: &str = "cps-lab-report/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn input(msg: impl ToString) -> Self {
        CliError::Input(msg.to_string())
    }
}

/// Everything needed to reproduce a run; embedded verbatim in its report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub certified: bool,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub scenarios: Option<usize>,
    pub out: Option<String>,
    /// Float comparison tolerance (unused by exact runs).
    pub tolerance: f64,
    /// Command-specific options.
    pub options: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig { command: command.into(), tolerance: 1e-9, ..Default::default() }
    }

    pub fn option(mut self, key: &str, v: impl Serialize) -> Self {
        self.options.insert(key.into(), json!(v));
        self
    }
}

/// An input file and its digest.
#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    #[serde(skip)]
    pub text: String,
}

pub fn read_input(path: &Path) -> Result<InputFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
    Ok(InputFile { path: path.display().to_string(), sha256: hex_digest(text.as_bytes()), text })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of one command: the report body and whether a condition failed.
#[derive(Debug)]
pub struct Outcome {
    pub arithmetic: &'static str,
    pub result: Value,
    pub violated: bool,
}

pub fn assemble(config: &RunConfig, inputs: &[InputFile], outcome: &Outcome) -> Value {
    json!({
        "schema": SCHEMA,
        "config": config,
        "provenance": {
            "tool": "cps-lab",
            "cli_version": env!("CARGO_PKG_VERSION"),
            "core_version": cps_lab::VERSION,
            "arithmetic": outcome.arithmetic,
            "seed": config.seed,
            "inputs": inputs,
        },
        "result": outcome.result,
    })
}

pub fn emit(report: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
