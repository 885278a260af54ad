//! JSON and CSV report persistence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report {path}: {source}")]
    Malformed {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// A result together with the version and configuration that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

impl<T> Report<T> {
    pub fn new(command: &str, config: &RunConfig, result: T) -> Self {
        Report {
            tool_version: afmass_core::VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            result,
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| ReportError::Malformed {
        path: path.display().to_string(),
        source,
    })?;
    w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_report<T: DeserializeOwned>(path: &Path) -> Result<T, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Malformed {
        path: path.display().to_string(),
        source,
    })
}

/// One header row from the field names of `T`, then one row per record.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ReportError> {
    let csv_error = |source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| io_error(path, e))
}
