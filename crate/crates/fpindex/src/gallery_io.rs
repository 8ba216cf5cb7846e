//! Gallery persistence: a single binary file, written atomically, with a
//! lock file excluding concurrent CLI invocations.
//!
//! Layout: magic `FPGL`, version (u32 LE), index-vector dimension K (u32 LE),
//! record count (u32 LE), then per record: id length (u32 LE) + UTF-8 id,
//! enrollment timestamp (u64 LE), the index vector as K f64 LE values, then
//! template blob length (u32 LE) + embedded template text (`FPTPL`). The
//! vector's minutia count is recovered from the embedded template.

use std::fs;
use std::path::{Path, PathBuf};

use fpindex_core::gallery::{EnrolledRecord, Gallery};
use fpindex_core::indexvec::IndexVector;

use crate::error::{Error, Result};
use crate::template_io;

const MAGIC: &[u8; 4] = b"FPGL";
const VERSION: u32 = 1;

/// Serializes a gallery to the canonical binary form.
pub fn gallery_to_bytes(g: &Gallery) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.len() as u32).to_le_bytes());
    for record in g.records() {
        let id = record.subject_id.as_bytes();
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        out.extend_from_slice(&record.enrolled_at.to_le_bytes());
        for v in record.index_vector.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let blob = template_io::template_to_string(&record.template);
        out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
        out.extend_from_slice(blob.as_bytes());
    }
    out
}

/// Saves atomically: the bytes land in a temporary sibling first and are
/// renamed over the destination.
pub fn save_gallery(path: &Path, g: &Gallery) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, gallery_to_bytes(g)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_gallery(path: &Path) -> Result<Gallery> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    gallery_from_bytes(&bytes, path)
}

fn gallery_from_bytes(bytes: &[u8], path: &Path) -> Result<Gallery> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > bytes.len() {
            return Err(Error::format(
                path,
                format!(
                    "truncated: wanted {n} bytes at offset {}, file has {}",
                    *pos,
                    bytes.len()
                ),
            ));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };

    let magic = take(&mut pos, 4)?;
    if magic != MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {magic:02x?}, expected {MAGIC:02x?}"),
        ));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    if dim == 0 || dim > 1 << 20 {
        return Err(Error::format(path, format!("implausible dimension {dim}")));
    }

    let mut gallery = Gallery::new(dim)?;
    for i in 0..count {
        let id_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let id = std::str::from_utf8(take(&mut pos, id_len)?)
            .map_err(|_| Error::format(path, format!("record {i}: id is not UTF-8")))?
            .to_owned();
        let enrolled_at = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let raw = take(&mut pos, 8 * dim)?;
        let values: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let blob_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let blob = std::str::from_utf8(take(&mut pos, blob_len)?)
            .map_err(|_| Error::format(path, format!("record {i}: template is not UTF-8")))?;
        let template = template_io::template_from_str(blob, path)?;
        let index_vector = IndexVector::from_parts(values, template.len())?;
        gallery.insert(EnrolledRecord {
            subject_id: id,
            index_vector,
            template,
            enrolled_at,
        })?;
    }
    if pos != bytes.len() {
        return Err(Error::format(
            path,
            format!("{} trailing bytes", bytes.len() - pos),
        ));
    }
    Ok(gallery)
}

/// Exclusive advisory lock for one gallery file; concurrent CLI invocations
/// against the same gallery are rejected while the lock exists. Dropping the
/// guard removes the lock.
pub struct GalleryLock {
    path: PathBuf,
}

impl GalleryLock {
    pub fn acquire(gallery_path: &Path) -> Result<Self> {
        let mut os = gallery_path.as_os_str().to_owned();
        os.push(".lock");
        let path: PathBuf = os.into();
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                use std::io::Write;
                let _ = write!(f, "{}", std::process::id());
                Ok(GalleryLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Locked { path })
            }
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for GalleryLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
