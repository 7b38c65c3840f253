use std::path::{Path, PathBuf};

use branched_core::scalar::{parse_q, Scalar, Q};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] branched_core::Error),
    #[error("{0}")]
    Usage(String),
    /// A check command found a discrepancy beyond its tolerance.
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use branched_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Domain(_)) => 2,
            CliError::Core(E::Parse { .. } | E::Json(_)) | CliError::Format { .. } => 3,
            CliError::Core(E::Invariant(_) | E::BasisAnomaly { .. }) => 4,
            CliError::Tolerance(_) => 5,
            CliError::Core(E::Io(_)) | CliError::File { .. } => 1,
        }
    }
}

pub type CliResult = Result<(), CliError>;

/// Output mode: human text or one JSON document on stdout.
pub struct Out {
    pub json: bool,
}

impl Out {
    pub fn emit(&self, human: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value()).expect("serializable"));
        } else {
            println!("{}", human());
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

/// Write an artifact to `path`, or print it when no path is given.
pub fn write_artifact<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|source| CliError::File {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// `a,b;c,d` as rows of exact rationals.
pub fn parse_matrix(src: &str) -> Result<Vec<Vec<Q>>, CliError> {
    let rows: Vec<Vec<Q>> = src
        .split(';')
        .map(|r| r.split(',').map(parse_q).collect::<branched_core::Result<_>>())
        .collect::<branched_core::Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("matrix {src:?} is not square")));
    }
    Ok(rows)
}

pub fn to_f64_matrix(m: &[Vec<Q>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect()
}

pub fn parse_vector(src: &str) -> Result<Vec<Q>, CliError> {
    Ok(src.split(',').map(parse_q).collect::<branched_core::Result<_>>()?)
}

pub fn word_text(w: &[u32]) -> String {
    if w.is_empty() {
        "()".into()
    } else {
        format!("({})", w.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "))
    }
}
