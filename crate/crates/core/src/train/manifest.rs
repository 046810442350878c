//! Ground-truth manifest: `capture_file,traffic_class,encryption`.

use super::label::{ClassLabel, Encryption, TrafficClass};
use crate::{Error, Result};

pub const MANIFEST_HEADER: &str = "capture_file,traffic_class,encryption";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub capture_file: String,
    pub label: ClassLabel,
}

pub fn read_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
        _ => return Err(Error::row(1, format!("expected header `{MANIFEST_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 || f[0].is_empty() {
            return Err(Error::row(i + 1, "expected capture_file,traffic_class,encryption"));
        }
        let class: TrafficClass = f[1].parse().map_err(|e: Error| Error::row(i + 1, e.to_string()))?;
        let enc: Encryption = f[2].parse().map_err(|e: Error| Error::row(i + 1, e.to_string()))?;
        let label = ClassLabel::from_parts(class, enc).map_err(|e| Error::row(i + 1, e.to_string()))?;
        out.push(ManifestEntry { capture_file: f[0].to_string(), label });
    }
    Ok(out)
}
