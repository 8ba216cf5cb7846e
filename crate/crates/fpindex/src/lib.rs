//! Fingerprint indexing toolkit: file formats, gallery persistence, search
//! benchmarking and the `fpindex` command-line interface.
//!
//! The algorithms live in `fpindex-core`; this crate carries everything that
//! touches the filesystem or the clock:
//!
//! - PGM image input/output with a resolution sidecar ([`pgm`])
//! - minutiae, label and template text formats ([`minutiae_io`],
//!   [`template_io`])
//! - the binary transform/codebook container and its JSON mirror ([`fpix`])
//! - gallery persistence with atomic writes and a lock file ([`gallery_io`])
//! - corpus manifests ([`manifest`]) and parameter files ([`config`])
//! - wall-clock search benchmarking ([`bench`])

pub mod bench;
pub mod config;
pub mod error;
pub mod fpix;
pub mod gallery_io;
pub mod manifest;
pub mod minutiae_io;
pub mod pgm;
pub mod template_io;

pub use error::{Error, Result};

/// Re-export of the algorithm crate.
pub use fpindex_core as core;
