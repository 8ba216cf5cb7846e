//! Template text format (`FPTPL`): the minutiae format extended with a
//! descriptor line per minutia.
//!
//! ```text
//! FPTPL 1 <count> <source_count>
//! <x> <y> <theta> <kind>
//! D25 <25 floats>
//! ```
//!
//! The descriptor tag carries its length (`D25` for the standard 25-D
//! descriptor), so templates with other descriptor widths stay readable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fpindex_core::descriptor::{Minutia, MinutiaDescriptor, MinutiaKind};
use fpindex_core::template::Template;

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

/// Serializes a template to the `FPTPL` text form.
pub fn template_to_string(t: &Template) -> String {
    let mut out = String::new();
    writeln!(out, "FPTPL 1 {} {}", t.len(), t.source_count()).expect("infallible");
    for (m, d) in t.minutiae().iter().zip(t.descriptors()) {
        writeln!(out, "{} {} {} {}", m.x, m.y, m.theta, kind_code(m.kind)).expect("infallible");
        write!(out, "D{}", d.len()).expect("infallible");
        for v in d.values() {
            write!(out, " {v}").expect("infallible");
        }
        out.push('\n');
    }
    out
}

pub fn write_template(path: &Path, t: &Template) -> Result<()> {
    fs::write(path, template_to_string(t)).map_err(|e| Error::io(path, e))
}

/// Parses the `FPTPL` text form. `origin` names the source in errors.
pub fn template_from_str(text: &str, origin: &Path) -> Result<Template> {
    let mut lines = text.lines().enumerate().peekable();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "FPTPL" || fields[1] != "1" {
        return Err(Error::parse(origin, 1, format!("bad header {header:?}")));
    }
    let count: usize = fields[2]
        .parse()
        .map_err(|_| Error::parse(origin, 1, "bad count"))?;
    let source_count: u32 = fields[3]
        .parse()
        .map_err(|_| Error::parse(origin, 1, "bad source count"))?;

    let mut minutiae = Vec::with_capacity(count);
    let mut descriptors = Vec::with_capacity(count);
    while let Some((idx, line)) = lines.next() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected 4 minutia fields, got {}", fields.len()),
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

        let (didx, dline) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, line_no, "missing descriptor line"))?;
        let dline_no = didx + 1;
        let mut parts = dline.split_whitespace();
        let tag = parts
            .next()
            .ok_or_else(|| Error::parse(origin, dline_no, "empty descriptor line"))?;
        let dim: usize = tag
            .strip_prefix('D')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::parse(origin, dline_no, format!("bad descriptor tag {tag:?}")))?;
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(origin, dline_no, "bad descriptor value"))?;
        if values.len() != dim {
            return Err(Error::parse(
                origin,
                dline_no,
                format!("descriptor tag says {dim} values, line has {}", values.len()),
            ));
        }
        descriptors.push(MinutiaDescriptor::from_values(values));
    }
    if minutiae.len() != count {
        return Err(Error::format(
            origin,
            format!("header says {count} minutiae, file has {}", minutiae.len()),
        ));
    }
    Template::with_source_count(minutiae, descriptors, source_count).map_err(Error::from)
}

pub fn read_template(path: &Path) -> Result<Template> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    template_from_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Template {
        let minutiae = vec![
            Minutia::new(10.25, 20.5, 1.125, MinutiaKind::RidgeEnding).unwrap(),
            Minutia::new(100.0, 200.0, 3.0, MinutiaKind::Unknown).unwrap(),
        ];
        let descriptors = vec![
            MinutiaDescriptor::from_values((0..25).map(|i| i as f64 * 0.1 - 1.0).collect()),
            MinutiaDescriptor::from_values((0..25).map(|i| (i as f64).sin()).collect()),
        ];
        Template::with_source_count(minutiae, descriptors, 3).unwrap()
    }

    #[test]
    fn roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tpl");
        let t = sample();
        write_template(&path, &t).unwrap();
        let bytes1 = fs::read(&path).unwrap();
        let back = read_template(&path).unwrap();
        assert_eq!(back, t);
        write_template(&path, &back).unwrap();
        let bytes2 = fs::read(&path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn descriptor_length_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tpl");
        fs::write(&path, "FPTPL 1 1 1\n1 2 0.5 E\nD3 1.0 2.0\n").unwrap();
        let err = read_template(&path).unwrap_err().to_string();
        assert!(err.contains("descriptor tag says 3"), "{err}");
    }
}
