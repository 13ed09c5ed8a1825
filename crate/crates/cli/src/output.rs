//! Atomic file output: write to a temporary file beside the target, then
//! rename over it, so readers never see a partial file.

use std::io::Write;
use std::path::Path;

use dgdls::error::{Error, Result};

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    write_atomic_with(path, contents, || Ok(()))
}

/// Like [`write_atomic`], running `before_rename` after the data is flushed.
/// If it fails the temporary file is removed and the target is untouched.
pub fn write_atomic_with(
    path: &Path,
    contents: &str,
    before_rename: impl FnOnce() -> Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    before_rename()?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
