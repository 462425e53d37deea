//! Experiment runner: problem construction, configuration layering, trace
//! persistence and cross-seed aggregation.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod instance;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use crate::meter::EvalMeter;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
