//! Human- and machine-readable result tables.
//!
//! * per traffic class, one-vs-all (labels of a class merged across encryptions)
//! * per (class, encryption) label, one-vs-all over all 14 labels
//! * per encryption, averages of one-vs-all scores within that encryption
//! * the confusion matrix itself (rows predicted, columns true)

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::evaluate::MetricsReport;
use super::label::{ClassLabel, Encryption, TrafficClass, NUM_CLASSES};
use super::metrics::{metrics_from_confusion, Scope};
use crate::{Error, Result};

pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, header: &[&str]) -> Self {
        Table {
            title: title.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = format!("{}\n{}\n", self.title, line(&self.header));
        writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", line(r)).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub overall_accuracy: Option<f64>,
    pub samples: u64,
    pub traffic_class: Table,
    pub class_encryption: Table,
    pub encryption: Table,
    pub confusion: Table,
}

/// Build the four tables from an evaluation. Needs the 14-label matrix and
/// at least one evaluated sample.
pub fn report(metrics: &MetricsReport) -> Result<Report> {
    let cm = &metrics.confusion;
    if cm.total() == 0 {
        return Err(Error::EmptyTestSet);
    }
    if cm.classes() != NUM_CLASSES {
        return Err(Error::shape(format!("{NUM_CLASSES} classes"), format!("{} classes", cm.classes())));
    }

    let mut traffic = Table::new("One-vs-all by traffic class", &["class", "Re", "Pr", "Ac", "support"]);
    let by_class = cm.collapse(TrafficClass::ALL.len(), |i| i / 3);
    for (c, m) in metrics_from_confusion(&by_class, Scope::All).classes.iter().enumerate() {
        traffic.rows.push(vec![
            TrafficClass::ALL[c].name().to_string(),
            fmt_metric(m.recall),
            fmt_metric(m.precision),
            fmt_metric(m.accuracy),
            (m.counts.tp + m.counts.fn_).to_string(),
        ]);
    }

    let mut per_label = Table::new(
        "One-vs-all by traffic class and encryption",
        &["label", "class", "encryption", "Re", "Pr", "Ac", "support"],
    );
    for m in &metrics.overall.classes {
        let l = ClassLabel::new(m.class)?;
        per_label.rows.push(vec![
            l.index().to_string(),
            l.traffic_class().name().to_string(),
            l.encryption().name().to_string(),
            fmt_metric(m.recall),
            fmt_metric(m.precision),
            fmt_metric(m.accuracy),
            (m.counts.tp + m.counts.fn_).to_string(),
        ]);
    }

    let mut enc_table = Table::new(
        "Average one-vs-all scores within each encryption",
        &["encryption", "avg_Re", "avg_Pr", "avg_Ac", "accuracy", "support"],
    );
    for enc in Encryption::ALL {
        let m = metrics_from_confusion(cm, Scope::Encryption(enc));
        let support: u64 = m.classes.iter().map(|c| c.counts.tp + c.counts.fn_).sum();
        enc_table.rows.push(vec![
            enc.name().to_string(),
            fmt_metric(m.macro_recall),
            fmt_metric(m.macro_precision),
            fmt_metric(m.macro_accuracy),
            fmt_metric(m.accuracy),
            support.to_string(),
        ]);
    }

    let header: Vec<String> = std::iter::once("pred\\true".to_string()).chain((0..NUM_CLASSES).map(|i| i.to_string())).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut confusion = Table::new("Confusion matrix (rows predicted, columns true)", &header_refs);
    for p in 0..NUM_CLASSES {
        let mut row = vec![p.to_string()];
        row.extend((0..NUM_CLASSES).map(|t| cm.get(p, t).to_string()));
        confusion.rows.push(row);
    }

    Ok(Report {
        overall_accuracy: metrics.overall.accuracy,
        samples: cm.total(),
        traffic_class: traffic,
        class_encryption: per_label,
        encryption: enc_table,
        confusion,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "samples: {}\noverall accuracy: {}\n\n",
            self.samples,
            fmt_metric(self.overall_accuracy)
        );
        for t in [&self.traffic_class, &self.class_encryption, &self.encryption, &self.confusion] {
            out.push_str(&t.to_text());
            out.push('\n');
        }
        out
    }

    /// Writes `traffic_class.csv`, `class_encryption.csv`, `encryption.csv`,
    /// `confusion.csv` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("traffic_class.csv"), self.traffic_class.to_csv())?;
        fs::write(dir.join("class_encryption.csv"), self.class_encryption.to_csv())?;
        fs::write(dir.join("encryption.csv"), self.encryption.to_csv())?;
        fs::write(dir.join("confusion.csv"), self.confusion.to_csv())?;
        fs::write(dir.join("report.txt"), self.to_text())?;
        Ok(())
    }
}
