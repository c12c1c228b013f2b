use std::fs;
use std::path::{Path, PathBuf};

use ragqa::{Error, Result};
use serde::Serialize;

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so a failed run never leaves a half-written output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::file(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_jsonl<'a, T, I>(path: &Path, items: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut buf = Vec::new();
    ragqa::jsonl::write(&mut buf, items)?;
    write_atomic(path, &buf)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

/// Refuses to run when an output would overwrite one of the inputs.
pub fn guard_outputs(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    ragqa::config::require_existing(inputs.iter().copied())?;
    let canonical: Vec<PathBuf> = inputs.iter().filter_map(|p| p.canonicalize().ok()).collect();
    for out in outputs {
        if let Ok(c) = out.canonicalize() {
            if canonical.contains(&c) {
                return Err(Error::Config(format!("output {} would overwrite an input", out.display())));
            }
        }
    }
    Ok(())
}

/// Passage texts stored next to an index by `build-index`.
pub fn passages_beside(index: &Path) -> PathBuf {
    let mut p = index.as_os_str().to_owned();
    p.push(".passages.jsonl");
    PathBuf::from(p)
}
