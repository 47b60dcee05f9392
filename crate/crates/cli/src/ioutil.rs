//! File helpers: atomic writes and line-oriented JSONL parsing with
//! collected, line-numbered errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::de::from_str;

/// Writes `content` to a sibling temp file and renames it into place, so
/// readers never observe a partial artifact.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy())
        .unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(content.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Derives a companion artifact path by swapping the extension:
/// `scores.csv` -> `scores.breakdown.jsonl` for suffix `breakdown.jsonl`.
pub fn companion(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

/// Parses a JSONL file, returning every successfully parsed line and a
/// list of `file:line: message` problems for the rest.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(
    path: &Path,
    problems: &mut Vec<String>,
) -> std::io::Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display();
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match from_str::<T>(line) {
            Ok(item) => items.push(item),
            Err(e) => problems.push(format!("{name}:{}: {e}", idx + 1)),
        }
    }
    Ok(items)
}
