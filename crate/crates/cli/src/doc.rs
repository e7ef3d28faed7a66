//! Result documents, error classification and input loading.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "chansteer";
pub const SCHEMA: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    Validation,
    Solver,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Io | ErrorKind::Parse | ErrorKind::Validation => 2,
            ErrorKind::Solver => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Name of the violated invariant for validation failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, invariant: None, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Usage, message)
    }

    pub fn validation(invariant: &str, message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Validation, invariant: Some(invariant.into()), message: message.into() }
    }
}

impl From<chansteer::Error> for CliError {
    fn from(e: chansteer::Error) -> Self {
        use chansteer::Error as E;
        if e.is_solver_failure() {
            return CliError::new(ErrorKind::Solver, e.to_string());
        }
        let invariant = match &e {
            E::DimensionMismatch(_) | E::LengthMismatch { .. } => "consistent dimensions",
            E::NotHermitian { .. } => "Hermitian operator",
            E::NonFinite => "finite entries",
            E::Invariant { invariant, .. } => invariant,
            E::StrategyCap { .. } => "deterministic strategy cap",
            E::RankDeficient { .. } => "informationally complete probes",
            E::Mismatch(_) => "cross-check agreement",
            E::SearchCap { .. } => "search dimension cap",
            E::SingularNewton { .. } | E::Solver { .. } => unreachable!("solver failures handled above"),
        };
        CliError::validation(invariant, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Io => CliError::new(ErrorKind::Io, e.to_string()),
            Category::Syntax | Category::Eof => CliError::new(ErrorKind::Parse, e.to_string()),
            Category::Data => CliError::validation("well-formed input object", e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
pub struct Document {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: &'static str,
    pub command: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<CliError>,
}

impl Document {
    pub fn ok(command: &str, result: Value) -> Self {
        Document {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA,
            command: command.into(),
            status: "ok",
            result: Some(result),
            error: None,
        }
    }

    pub fn err(command: &str, error: CliError) -> Self {
        Document {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA,
            command: command.into(),
            status: "error",
            result: None,
            error: Some(error),
        }
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

/// Reads an object either bare or wrapped in a result document, where it
/// sits at `result.object` (or `result` itself).
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text)?;
    if v.get("tool").is_some() {
        if v.get("status").and_then(Value::as_str) != Some("ok") {
            return Err(CliError::validation("input document has status ok", path.display().to_string()));
        }
        v = v["result"].take();
        if let Some(inner) = v.get_mut("object") {
            v = inner.take();
        }
    }
    Ok(serde_json::from_value(v)?)
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("library types serialize")
}
