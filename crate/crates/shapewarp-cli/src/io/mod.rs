//! File formats: PLY point clouds, OBJ triangle meshes, the binary model
//! container and the JSON spec/estimate files.

pub mod container;
pub mod obj;
pub mod ply;
pub mod spec_files;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileFormatError {
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

pub(crate) fn io_err(path: &Path, err: std::io::Error) -> FileFormatError {
    FileFormatError::Io {
        path: path.to_path_buf(),
        err,
    }
}

pub(crate) fn malformed(path: &Path, message: impl Into<String>) -> FileFormatError {
    FileFormatError::Malformed {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads a pretty or compact JSON file into any deserializable type.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileFormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

/// Writes a value as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileFormatError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| malformed(path, format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
