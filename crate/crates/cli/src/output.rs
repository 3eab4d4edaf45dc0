//! Error-to-exit-code mapping and machine-readable outputs.

use std::fmt;
use std::path::{Path, PathBuf};

use echogeo_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::Command;

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) | CliError::Core(Error::Parameter(_)) => 2,
            CliError::Core(Error::Divergence { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Param(m) => write!(f, "invalid parameter: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

/// JSON number, or a string for NaN and infinities.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("Infinity")
    } else {
        json!("-Infinity")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Core(Error::Io { path: path.into(), source: e }))
}

pub fn write_value(path: &Path, value: &Value) -> CliResult<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// `out.ext` → `out.<suffix>`, keeping the directory.
pub fn beside(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// The fully resolved invocation; `echogeo replay FILE` re-runs it.
#[derive(Serialize)]
struct RunRecord<'a> {
    tool: &'static str,
    version: &'static str,
    threads: usize,
    command: &'a Command,
    resolved: Value,
}

pub fn write_config(path: &Path, command: &Command, resolved: Value) -> CliResult<()> {
    let record = RunRecord {
        tool: "echogeo",
        version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        command,
        resolved,
    };
    write_value(path, &serde_json::to_value(&record)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(param("x").exit_code(), 2);
        assert_eq!(CliError::from(Error::Parameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Data("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Dechirp("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Divergence { epoch: 3, loss: f64::NAN }).exit_code(), 4);
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(num(1.5), json!(1.5));
        assert_eq!(num(f64::NAN), json!("NaN"));
        assert_eq!(num(f64::INFINITY), json!("Infinity"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-Infinity"));
        let text = serde_json::to_string(&nums(&[f64::INFINITY, 2.0])).unwrap();
        assert_eq!(text, r#"["Infinity",2.0]"#);
    }

    #[test]
    fn beside_replaces_the_extension() {
        assert_eq!(beside(Path::new("a/b/m.ckpt"), "config.json"), PathBuf::from("a/b/m.config.json"));
    }
}
