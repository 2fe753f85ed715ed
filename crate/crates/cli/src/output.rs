use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Machine-readable error written to stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
    pub context: Value,
}

#[derive(Debug)]
pub enum CliError {
    Usage {
        code: String,
        message: String,
        context: Value,
    },
    Io {
        path: PathBuf,
        source: io::Error,
    },
}

impl CliError {
    pub fn usage(message: impl Into<String>, context: Value) -> Self {
        CliError::Usage {
            code: "UsageError".into(),
            message: message.into(),
            context,
        }
    }

    pub fn core(err: itp_core::Error, context: Value) -> Self {
        CliError::Usage {
            code: err.code().into(),
            message: err.to_string(),
            context,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn report(&self) -> ErrorReport {
        match self {
            CliError::Usage { code, message, context } => ErrorReport {
                code: code.clone(),
                message: message.clone(),
                context: context.clone(),
            },
            CliError::Io { path, source } => ErrorReport {
                code: "IoError".into(),
                message: source.to_string(),
                context: serde_json::json!({ "path": path.display().to_string() }),
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs always serialize");
    s.push('\n');
    s
}

/// Shortest representation that reads back to the same value; exponent
/// form outside `[1e-5, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
