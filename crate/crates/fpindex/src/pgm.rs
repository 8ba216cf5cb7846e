//! Binary PGM ("P5", 8-bit) image input and output.
//!
//! PGM has no resolution field; the dots-per-inch value comes from an
//! optional sidecar file `<image>.dpi` holding one integer, or from the
//! caller's default (typically a CLI flag).

use std::fs;
use std::io::Write;
use std::path::Path;

use fpindex_core::imaging::GrayImage;

use crate::error::{Error, Result};

/// Reads a binary PGM. The resolution is taken from the `<path>.dpi` sidecar
/// when present, otherwise `default_dpi` is used.
pub fn read_pgm(path: &Path, default_dpi: u32) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let dpi = read_dpi_sidecar(path)?.unwrap_or(default_dpi);
    parse_pgm(&bytes, dpi).map_err(|detail| Error::format(path, detail))
}

fn read_dpi_sidecar(path: &Path) -> Result<Option<u32>> {
    let sidecar = sidecar_path(path);
    if !sidecar.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let dpi: u32 = text
        .trim()
        .parse()
        .map_err(|_| Error::format(&sidecar, format!("not a dpi integer: {:?}", text.trim())))?;
    if dpi == 0 {
        return Err(Error::format(&sidecar, "dpi must be nonzero"));
    }
    Ok(Some(dpi))
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".dpi");
    os.into()
}

fn parse_pgm(bytes: &[u8], dpi: u32) -> std::result::Result<GrayImage, String> {
    let mut pos = 0usize;

    let mut token = |bytes: &[u8]| -> std::result::Result<String, String> {
        // Skip whitespace and '#' comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token(bytes)?;
    if magic != "P5" {
        return Err(format!("bad magic {magic:?}, expected \"P5\""));
    }
    let width: usize = token(bytes)?.parse().map_err(|_| "bad width".to_string())?;
    let height: usize = token(bytes)?.parse().map_err(|_| "bad height".to_string())?;
    let maxval: usize = token(bytes)?.parse().map_err(|_| "bad maxval".to_string())?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, expected 255"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| "image dimensions overflow".to_string())?;
    let raster = &bytes[pos..];
    if raster.len() != expected {
        return Err(format!(
            "raster is {} bytes, expected {expected}",
            raster.len()
        ));
    }
    GrayImage::new(width, height, raster.to_vec(), dpi).map_err(|e| e.to_string())
}

/// Writes a binary PGM; emits a `<path>.dpi` sidecar when the resolution
/// differs from `default_dpi_for_sidecar` (pass the image's own dpi to skip
/// the sidecar entirely).
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = Vec::with_capacity(img.pixels().len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height()).expect("infallible");
    out.extend_from_slice(img.pixels());
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the resolution sidecar for an image path.
pub fn write_dpi_sidecar(path: &Path, dpi: u32) -> Result<()> {
    let sidecar = sidecar_path(path);
    fs::write(&sidecar, format!("{dpi}\n")).map_err(|e| Error::io(&sidecar, e))
}
