//! Minutiae and label text formats.
//!
//! Minutiae file (`FPMIN`), one per image:
//!
//! ```text
//! FPMIN 1 <count>
//! <x> <y> <theta> <kind>
//! ```
//!
//! with x, y in decimal pixels, theta in decimal radians, kind one of
//! `E` (ridge ending), `B` (bifurcation), `U` (unknown).
//!
//! Label file (`FPLBL`), parallel to a minutiae file; class ids group the
//! observations of one physical minutia for transform training, `-1` marks
//! an unlabeled (e.g. spurious) minutia:
//!
//! ```text
//! FPLBL 1 <count>
//! <class id or -1>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fpindex_core::descriptor::{Minutia, MinutiaKind};

use crate::error::{Error, Result};

fn kind_code(kind: MinutiaKind) -> char {
    match kind {
        MinutiaKind::RidgeEnding => 'E',
        MinutiaKind::Bifurcation => 'B',
        MinutiaKind::Unknown => 'U',
    }
}

fn kind_from_code(s: &str) -> Option<MinutiaKind> {
    match s {
        "E" => Some(MinutiaKind::RidgeEnding),
        "B" => Some(MinutiaKind::Bifurcation),
        "U" => Some(MinutiaKind::Unknown),
        _ => None,
    }
}

/// Serializes minutiae to the `FPMIN` text form.
pub fn minutiae_to_string(minutiae: &[Minutia]) -> String {
    let mut out = String::new();
    writeln!(out, "FPMIN 1 {}", minutiae.len()).expect("infallible");
    for m in minutiae {
        writeln!(out, "{} {} {} {}", m.x, m.y, m.theta, kind_code(m.kind)).expect("infallible");
    }
    out
}

pub fn write_minutiae(path: &Path, minutiae: &[Minutia]) -> Result<()> {
    fs::write(path, minutiae_to_string(minutiae)).map_err(|e| Error::io(path, e))
}

/// Parses the `FPMIN` text form. `origin` names the source in errors.
pub fn minutiae_from_str(text: &str, origin: &Path) -> Result<Vec<Minutia>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "FPMIN" {
        return Err(Error::parse(origin, 1, format!("bad header {header:?}")));
    }
    if fields[1] != "1" {
        return Err(Error::parse(
            origin,
            1,
            format!("unsupported version {}", fields[1]),
        ));
    }
    let count: usize = fields[2]
        .parse()
        .map_err(|_| Error::parse(origin, 1, "bad count"))?;

    let mut minutiae = Vec::with_capacity(count);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(origin, line_no, "bad x"))?;
        let y: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(origin, line_no, "bad y"))?;
        let theta: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(origin, line_no, "bad theta"))?;
        let kind = kind_from_code(fields[3])
            .ok_or_else(|| Error::parse(origin, line_no, format!("bad kind {:?}", fields[3])))?;
        minutiae.push(
            Minutia::new(x, y, theta, kind)
                .map_err(|e| Error::parse(origin, line_no, e.to_string()))?,
        );
    }
    if minutiae.len() != count {
        return Err(Error::format(
            origin,
            format!("header says {count} minutiae, file has {}", minutiae.len()),
        ));
    }
    Ok(minutiae)
}

pub fn read_minutiae(path: &Path) -> Result<Vec<Minutia>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    minutiae_from_str(&text, path)
}

/// Writes a label file parallel to a minutiae list.
pub fn write_labels(path: &Path, labels: &[Option<i64>]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "FPLBL 1 {}", labels.len()).expect("infallible");
    for l in labels {
        writeln!(out, "{}", l.unwrap_or(-1)).expect("infallible");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<Option<i64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "FPLBL" || fields[1] != "1" {
        return Err(Error::parse(path, 1, format!("bad header {header:?}")));
    }
    let count: usize = fields[2]
        .parse()
        .map_err(|_| Error::parse(path, 1, "bad count"))?;
    let mut labels = Vec::with_capacity(count);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: i64 = line
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, idx + 1, "bad label"))?;
        labels.push(if v < 0 { None } else { Some(v) });
    }
    if labels.len() != count {
        return Err(Error::format(
            path,
            format!("header says {count} labels, file has {}", labels.len()),
        ));
    }
    Ok(labels)
}
