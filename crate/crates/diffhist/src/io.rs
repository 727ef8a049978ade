//! Plain-text sample files and atomic JSON/text output.
//!
//! Sample files hold one value per line; blank lines and lines starting
//! with '#' are ignored. Values are written with the shortest decimal form
//! that round-trips, so a write/read cycle restores the exact bits.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::samples::SampleBatch;

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: display(path),
        source,
    }
}

/// Parse a sample file. Unparseable or non-finite values fail with the
/// 1-based line number.
pub fn read_samples(path: &Path) -> Result<SampleBatch> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|e| Error::Parse {
            path: display(path),
            line: idx + 1,
            detail: format!("{e}: {line:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: display(path),
                line: idx + 1,
                detail: format!("non-finite value {line:?}"),
            });
        }
        values.push(value);
    }
    SampleBatch::new(values)
}

/// Write one sample per line, optionally preceded by a '#' comment header.
pub fn write_samples(path: &Path, samples: &SampleBatch, header: Option<&str>) -> Result<()> {
    let mut text = String::new();
    if let Some(header) = header {
        text.push_str("# ");
        text.push_str(header);
        text.push('\n');
    }
    for value in samples {
        text.push_str(&value.to_string());
        text.push('\n');
    }
    write_text_atomic(path, &text)
}

/// Write via a same-directory temporary file and rename, so a crash cannot
/// leave a half-written file at the destination.
pub fn write_text_atomic(path: &Path, text: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io_err(path, std::io::Error::other("path has no file name")))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path, e)
    })
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: display(path),
        source: e,
    })?;
    text.push('\n');
    write_text_atomic(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: display(path),
        source: e,
    })
}
