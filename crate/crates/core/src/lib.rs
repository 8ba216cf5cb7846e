//! Fingerprint identification pre-filter core.
//!
//! Converts a fingerprint (grayscale image plus minutiae) into a fixed-length
//! index vector and narrows 1:1 matching to a short candidate list:
//!
//! 1. [`imaging`] — band-pass enhancement (difference of Gaussians followed by
//!    local mean/variance normalization).
//! 2. [`descriptor`] — a 360-D Gabor wavelet feature sampled at nine points
//!    around each minutia, projected to a 25-D minutia descriptor through a
//!    trained linear transform.
//! 3. [`training`] — PCA (360→30), LDA (30→25) and the k-means codebook
//!    (200 centroids by default) learned from a labeled descriptor corpus.
//! 4. [`indexvec`] — soft cluster memberships per descriptor, aggregated into
//!    one zero-mean index vector per fingerprint.
//! 5. [`template`] — multi-impression fusion into a super-template by rigid
//!    alignment, greedy minutia correspondence and weighted averaging.
//! 6. [`gallery`] — enrollment and exhaustive Euclidean ranking with a
//!    penetration cutoff `ceil(N * pr)`.
//! 7. [`evaluate`] — penetration-rate vs error-rate curves.
//! 8. [`synthgen`] — deterministic synthetic fingers so the whole pipeline is
//!    exercisable without real biometric data.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats, the CLI
//! and timing benchmarks live in the companion `fpindex` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod descriptor;
pub mod error;
pub mod evaluate;
pub mod gallery;
pub mod geom;
pub mod imaging;
pub mod indexvec;
pub mod mat;
pub mod rng;
pub mod synthgen;
pub mod template;
pub mod training;

pub use error::{Error, Result};
