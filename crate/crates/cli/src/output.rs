//! Output files, the run manifest and the error-to-exit-code mapping.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// Rejected input or a failed computation.
    Domain(nw_core::Error),
    /// A verification check did not hold.
    Verification(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Usage(_) => 64,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<nw_core::Error> for CliError {
    fn from(e: nw_core::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(nw_core::Error::Io(e.to_string()))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Pretty JSON with sorted keys (objects go through `serde_json::Map`,
/// which is ordered).
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// `{"report": .., "units": ..}`.
pub fn with_units(report: Value, units: Value) -> Value {
    json!({ "report": report, "units": units })
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(to_json(value)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// The `i`-th `--out` path, or `name` beside the first one.
pub fn out_path(outs: &[PathBuf], i: usize, name: &str) -> PathBuf {
    outs.get(i).cloned().unwrap_or_else(|| sibling(&outs[0], name))
}

pub fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map(|d| d.join(name)).unwrap_or_else(|| PathBuf::from(name))
}

/// What was run, with which resolved inputs, and where the results went.
/// The only place wall time appears.
pub struct Manifest {
    pub subcommand: &'static str,
    pub config: Value,
    pub outputs: Vec<PathBuf>,
    pub extra: Option<Value>,
    started: Instant,
}

impl Manifest {
    pub fn start(subcommand: &'static str) -> Self {
        Manifest { subcommand, config: Value::Null, outputs: Vec::new(), extra: None, started: Instant::now() }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut v = json!({
            "subcommand": self.subcommand,
            "config": self.config,
            "tool": { "name": "nw", "version": env!("CARGO_PKG_VERSION") },
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "argv": std::env::args().collect::<Vec<_>>(),
        });
        if let Some(extra) = &self.extra {
            v["results"] = extra.clone();
        }
        write_json(path, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(CliError::Domain(nw_core::Error::Domain("x".into())).exit_code(), 1);
        assert_eq!(CliError::Verification("min_margin".into()).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 64);
    }

    #[test]
    fn json_keys_are_sorted() {
        let text = to_json(&json!({ "b": 1, "a": { "d": 2, "c": 3 } })).unwrap();
        let (a, b) = (text.find("\"a\"").unwrap(), text.find("\"b\"").unwrap());
        let (c, d) = (text.find("\"c\"").unwrap(), text.find("\"d\"").unwrap());
        assert!(a < b && c < d);
    }
}
