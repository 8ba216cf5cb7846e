//! Binary container for trained artifacts, plus a JSON mirror for
//! inspection. The binary form is canonical.
//!
//! Layout: magic `FPIX`, format version (u32 LE), record type byte
//! (1 = transform, 2 = codebook), dimensions (u32 LE each), then row-major
//! IEEE-754 f64 LE payload:
//!
//! - transform: rows, cols, then `mean[rows]`, then `matrix[rows x cols]`
//! - codebook: k, dim, then `centroids[k x dim]`

use std::fs;
use std::path::Path;

use fpindex_core::descriptor::{DescriptorTransform, Provenance};
use fpindex_core::mat::Mat;
use fpindex_core::training::Codebook;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FPIX";
const VERSION: u32 = 1;
const TYPE_TRANSFORM: u8 = 1;
const TYPE_CODEBOOK: u8 = 2;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::format(
                self.path,
                format!(
                    "truncated: wanted {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.bytes.len()
                ),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn expect_magic(&mut self) -> Result<()> {
        let got = self.take(4)?;
        if got != MAGIC {
            return Err(Error::format(
                self.path,
                format!("bad magic {got:02x?}, expected {MAGIC:02x?}"),
            ));
        }
        Ok(())
    }

    fn expect_end(&mut self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.path,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

fn header(record_type: u8) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(record_type);
    out
}

fn push_f64s(out: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serializes a transform to the canonical binary form.
pub fn transform_to_bytes(t: &DescriptorTransform) -> Vec<u8> {
    let mut out = header(TYPE_TRANSFORM);
    out.extend_from_slice(&(t.input_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(t.output_dim() as u32).to_le_bytes());
    push_f64s(&mut out, t.mean().iter().copied());
    push_f64s(&mut out, t.matrix().data().iter().copied());
    out
}

pub fn write_transform(path: &Path, t: &DescriptorTransform) -> Result<()> {
    fs::write(path, transform_to_bytes(t)).map_err(|e| Error::io(path, e))
}

pub fn read_transform(path: &Path) -> Result<DescriptorTransform> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    r.expect_magic()?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let record_type = r.u8()?;
    if record_type != TYPE_TRANSFORM {
        return Err(Error::format(
            path,
            format!("record type {record_type} is not a transform"),
        ));
    }
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    if rows == 0 || cols == 0 || rows > 1 << 20 || cols > 1 << 20 {
        return Err(Error::format(path, format!("implausible shape {rows}x{cols}")));
    }
    let mean = r.f64s(rows)?;
    let matrix = r.f64s(rows * cols)?;
    r.expect_end()?;
    let mut t = DescriptorTransform::new(
        mean,
        Mat::from_vec(rows, cols, matrix).map_err(Error::from)?,
        Provenance::Loaded,
    )?;
    t.version = version;
    Ok(t)
}

/// Serializes a codebook to the canonical binary form.
pub fn codebook_to_bytes(cb: &Codebook) -> Vec<u8> {
    let mut out = header(TYPE_CODEBOOK);
    out.extend_from_slice(&(cb.k() as u32).to_le_bytes());
    out.extend_from_slice(&(cb.dim() as u32).to_le_bytes());
    for c in cb.centroids() {
        push_f64s(&mut out, c.iter().copied());
    }
    out
}

pub fn write_codebook(path: &Path, cb: &Codebook) -> Result<()> {
    fs::write(path, codebook_to_bytes(cb)).map_err(|e| Error::io(path, e))
}

pub fn read_codebook(path: &Path) -> Result<Codebook> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    r.expect_magic()?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let record_type = r.u8()?;
    if record_type != TYPE_CODEBOOK {
        return Err(Error::format(
            path,
            format!("record type {record_type} is not a codebook"),
        ));
    }
    let k = r.u32()? as usize;
    let dim = r.u32()? as usize;
    if k == 0 || dim == 0 || k > 1 << 20 || dim > 1 << 20 {
        return Err(Error::format(path, format!("implausible shape {k}x{dim}")));
    }
    let mut centroids = Vec::with_capacity(k);
    for _ in 0..k {
        centroids.push(r.f64s(dim)?);
    }
    r.expect_end()?;
    Codebook::new(centroids).map_err(Error::from)
}

#[derive(serde::Serialize)]
struct TransformJson<'a> {
    format: &'static str,
    version: u32,
    kind: &'static str,
    rows: usize,
    cols: usize,
    mean: &'a [f64],
    /// Row-major.
    matrix: &'a [f64],
}

#[derive(serde::Serialize)]
struct CodebookJson<'a> {
    format: &'static str,
    version: u32,
    kind: &'static str,
    k: usize,
    dim: usize,
    centroids: &'a [Vec<f64>],
}

/// Writes the JSON mirror of a transform (inspection only; binary is
/// canonical).
pub fn write_transform_json(path: &Path, t: &DescriptorTransform) -> Result<()> {
    let json = TransformJson {
        format: "fpix",
        version: VERSION,
        kind: "transform",
        rows: t.input_dim(),
        cols: t.output_dim(),
        mean: t.mean(),
        matrix: t.matrix().data(),
    };
    let text = serde_json::to_string_pretty(&json).expect("serializable");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the JSON mirror of a codebook.
pub fn write_codebook_json(path: &Path, cb: &Codebook) -> Result<()> {
    let json = CodebookJson {
        format: "fpix",
        version: VERSION,
        kind: "codebook",
        k: cb.k(),
        dim: cb.dim(),
        centroids: cb.centroids(),
    };
    let text = serde_json::to_string_pretty(&json).expect("serializable");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
