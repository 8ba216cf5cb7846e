//! Error type shared by the pipeline stages.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by the indexing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation.
    InvalidParameter(String),
    /// Image too small for the descriptor pipeline.
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    /// A minutia sampling point, including its kernel support, leaves the
    /// image. Carries the offending sampling-point index (0 = center).
    SamplingOutOfBounds { point: usize },
    /// Vector or matrix dimensions do not match.
    DimensionMismatch { expected: usize, got: usize },
    /// No minutiae survived descriptor extraction.
    EmptyTemplate,
    /// Memberships were uniform; the index vector normalizer is below
    /// threshold and the vector is undefined.
    DegenerateVector,
    /// Not enough samples for the requested number of components.
    RankDeficient { achievable: usize, requested: usize },
    /// Too few classes for the requested discriminant dimension.
    TooFewClasses { have: usize, need: usize },
    /// Fewer distinct points than requested clusters.
    TooFewDistinctPoints { distinct: usize, k: usize },
    /// Clustering converged onto identical centroids.
    DuplicateCentroids { a: usize, b: usize },
    /// Matrix is not positive definite (training regularization too small).
    NotPositiveDefinite,
    /// Subject id already enrolled.
    DuplicateSubject(String),
    /// Subject id not present in the gallery.
    UnknownSubject(String),
    /// Operation requires a nonempty gallery.
    EmptyGallery,
    /// Penetration rate outside (0, 1].
    PenetrationOutOfRange(f64),
    /// An evaluation query names a mate that is not enrolled.
    UnenrolledMate(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::ImageTooSmall { width, height, min } => write!(
                f,
                "image {width}x{height} too small, need at least {min}x{min}"
            ),
            Error::SamplingOutOfBounds { point } => {
                write!(f, "sampling point {point} leaves the image")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyTemplate => write!(f, "no minutiae survived descriptor extraction"),
            Error::DegenerateVector => {
                write!(f, "degenerate index vector: memberships are uniform")
            }
            Error::RankDeficient {
                achievable,
                requested,
            } => write!(
                f,
                "rank deficient: {requested} components requested, at most {achievable} achievable"
            ),
            Error::TooFewClasses { have, need } => {
                write!(f, "need >= {need} classes, have {have}")
            }
            Error::TooFewDistinctPoints { distinct, k } => {
                write!(f, "need >= {k} distinct points, have {distinct}")
            }
            Error::DuplicateCentroids { a, b } => {
                write!(f, "centroids {a} and {b} are identical")
            }
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::DuplicateSubject(id) => write!(f, "subject '{id}' already enrolled"),
            Error::UnknownSubject(id) => write!(f, "unknown subject '{id}'"),
            Error::EmptyGallery => write!(f, "gallery is empty"),
            Error::PenetrationOutOfRange(pr) => {
                write!(f, "penetration rate {pr} outside (0, 1]")
            }
            Error::UnenrolledMate(id) => write!(f, "query mate '{id}' is not enrolled"),
        }
    }
}

impl core::error::Error for Error {}
