//! Corpus manifest (`FPMAN`): a text index of impressions.
//!
//! ```text
//! FPMAN 1 <entries>
//! <subject_id> <impression> <image.pgm> <minutiae.min> [labels.lbl]
//! ```
//!
//! Paths are relative to the manifest's directory. The optional labels
//! column carries minutia class ids for transform training.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub impression: u32,
    pub image: PathBuf,
    pub minutiae: PathBuf,
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Entries for one subject, in impression order.
    pub fn by_subject(&self, subject_id: &str) -> Vec<&ManifestEntry> {
        let mut entries: Vec<&ManifestEntry> = self
            .entries
            .iter()
            .filter(|e| e.subject_id == subject_id)
            .collect();
        entries.sort_by_key(|e| e.impression);
        entries
    }

    /// Distinct subject ids in first-appearance order.
    pub fn subjects(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if !seen.contains(&e.subject_id.as_str()) {
                seen.push(e.subject_id.as_str());
            }
        }
        seen
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "FPMAN 1 {}", manifest.entries.len()).expect("infallible");
    for e in &manifest.entries {
        write!(
            out,
            "{} {} {} {}",
            e.subject_id,
            e.impression,
            e.image.display(),
            e.minutiae.display()
        )
        .expect("infallible");
        if let Some(l) = &e.labels {
            write!(out, " {}", l.display()).expect("infallible");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a manifest; relative paths are resolved against the manifest's
/// directory.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "FPMAN" || fields[1] != "1" {
        return Err(Error::parse(path, 1, format!("bad header {header:?}")));
    }
    let count: usize = fields[2]
        .parse()
        .map_err(|_| Error::parse(path, 1, "bad count"))?;

    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            base.join(pb)
        }
    };

    let mut entries = Vec::with_capacity(count);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 && fields.len() != 5 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 or 5 fields, got {}", fields.len()),
            ));
        }
        entries.push(ManifestEntry {
            subject_id: fields[0].to_owned(),
            impression: fields[1]
                .parse()
                .map_err(|_| Error::parse(path, line_no, "bad impression index"))?,
            image: resolve(fields[2]),
            minutiae: resolve(fields[3]),
            labels: fields.get(4).map(|p| resolve(p)),
        });
    }
    if entries.len() != count {
        return Err(Error::format(
            path,
            format!("header says {count} entries, file has {}", entries.len()),
        ));
    }
    Ok(Manifest { entries })
}
