use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

/// The single JSON document every run emits.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// `ok`, `numeric_failure` or `config_error`.
    pub status: &'static str,
    pub error: Option<String>,
    /// The effective configuration; it re-runs to the same payload.
    pub config: Option<RunConfig>,
    pub timing_ms: f64,
    pub warnings: Vec<String>,
    /// Artifact files written to the output directory.
    pub files: Vec<String>,
    pub payload: Value,
}

/// Pretty JSON with object keys sorted.
pub fn to_sorted_json<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("serializable report");
    serde_json::to_string_pretty(&value).expect("JSON value prints")
}

impl ReportEnvelope {
    pub fn success(
        command: &str,
        config: &RunConfig,
        payload: Value,
        warnings: Vec<String>,
        files: Vec<String>,
        start: Instant,
    ) -> Self {
        ReportEnvelope {
            tool: "hypermin",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            status: "ok",
            error: None,
            config: Some(config.clone()),
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
            warnings,
            files,
            payload,
        }
    }

    pub fn failure(
        command: &str,
        config: Option<&RunConfig>,
        e: &CliError,
        start: Instant,
    ) -> Self {
        ReportEnvelope {
            tool: "hypermin",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            status: if e.code == 1 {
                "numeric_failure"
            } else {
                "config_error"
            },
            error: Some(e.message.clone()),
            config: config.cloned(),
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
            warnings: Vec::new(),
            files: Vec::new(),
            payload: Value::Null,
        }
    }

    /// Write `<command>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        if self.command.is_empty() {
            return Ok(());
        }
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{}.json", self.command));
        std::fs::write(&path, to_sorted_json(self) + "\n").map_err(|e| CliError::io(&path, e))
    }

    /// Print to stdout, and the error message to stderr.
    pub fn emit(&self, err: Option<&CliError>) {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", to_sorted_json(self));
        if let Some(e) = err.map(|e| e.message.as_str()).or(self.error.as_deref()) {
            eprintln!("error: {e}");
        }
    }
}
