//! On-disk histogram datasets: one FH01 file per window plus `index.csv`.
//!
//! FH01 layout (little-endian): `"FH01"`, u16 rows, u16 cols, u16 label,
//! u16 reserved, then `rows*cols` u16 counts in row-major order. Counts
//! saturate at 65535. Label 0xFFFF marks an unlabeled window.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::histogram::FlowHistogram;
use crate::train::ClassLabel;
use crate::{Error, Result};

pub const FH01_MAGIC: &[u8; 4] = b"FH01";
pub const UNLABELED: u16 = u16::MAX;
const HEADER_LEN: usize = 12;
const INDEX_HEADER: &str = "path,label,source_flow,t0";

pub fn encode_fh01(hist: &FlowHistogram) -> Vec<u8> {
    let (rows, cols) = (hist.rows(), hist.cols());
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * rows * cols);
    out.extend_from_slice(FH01_MAGIC);
    out.extend_from_slice(&(rows as u16).to_le_bytes());
    out.extend_from_slice(&(cols as u16).to_le_bytes());
    let label = hist.label.map_or(UNLABELED, |l| l.index() as u16);
    out.extend_from_slice(&label.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    for count in hist.to_dense() {
        out.extend_from_slice(&(count.min(u16::MAX as u32) as u16).to_le_bytes());
    }
    out
}

pub fn decode_fh01(bytes: &[u8]) -> Result<FlowHistogram> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != FH01_MAGIC {
        return Err(Error::format("FH01", "missing FH01 header"));
    }
    let u16_at = |off: usize| u16::from_le_bytes([bytes[off], bytes[off + 1]]);
    let rows = u16_at(4) as usize;
    let cols = u16_at(6) as usize;
    let label = u16_at(8);
    if bytes.len() != HEADER_LEN + 2 * rows * cols {
        return Err(Error::format(
            "FH01",
            format!("expected {} bytes for {rows}x{cols}, got {}", HEADER_LEN + 2 * rows * cols, bytes.len()),
        ));
    }
    let counts: Vec<u32> = bytes[HEADER_LEN..]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
        .collect();
    let label = match label {
        UNLABELED => None,
        l => Some(ClassLabel::new(l as usize)?),
    };
    Ok(FlowHistogram::from_dense(rows, cols, &counts).with_label(label))
}

/// A labeled histogram plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub hist: FlowHistogram,
    /// Identifier of the parent flow, unique across the dataset.
    pub source_flow: String,
    pub t0: f64,
}

/// Write every entry as `hNNNNNN.fh01` under `dir` and an `index.csv`.
pub fn write_dataset(dir: &Path, entries: &[DatasetEntry]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = String::from(INDEX_HEADER);
    index.push('\n');
    for (i, e) in entries.iter().enumerate() {
        let label = e
            .hist
            .label
            .ok_or_else(|| Error::format("dataset", format!("entry {i} is unlabeled")))?;
        if e.source_flow.contains([',', '\n']) {
            return Err(Error::format("dataset", format!("source_flow `{}` contains a separator", e.source_flow)));
        }
        let name = format!("h{i:06}.fh01");
        fs::write(dir.join(&name), encode_fh01(&e.hist))?;
        writeln!(index, "{name},{},{},{:.6}", label.index(), e.source_flow, e.t0).unwrap();
    }
    fs::write(dir.join("index.csv"), index)?;
    Ok(())
}

/// Load a dataset written by [`write_dataset`]. The index label is checked
/// against each file header.
pub fn read_dataset(dir: &Path) -> Result<Vec<DatasetEntry>> {
    let text = fs::read_to_string(dir.join("index.csv"))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == INDEX_HEADER => {}
        _ => return Err(Error::row(1, format!("expected header `{INDEX_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::row(line_no, "expected 4 fields"));
        }
        let label: usize = f[1].parse().map_err(|_| Error::row(line_no, "bad label"))?;
        let label = ClassLabel::new(label)?;
        let t0: f64 = f[3].parse().map_err(|_| Error::row(line_no, "bad t0"))?;
        let hist = decode_fh01(&fs::read(dir.join(f[0]))?)?;
        if hist.label != Some(label) {
            return Err(Error::row(line_no, format!("label {} disagrees with file header", label.index())));
        }
        out.push(DatasetEntry { hist, source_flow: f[2].to_string(), t0 });
    }
    Ok(out)
}
