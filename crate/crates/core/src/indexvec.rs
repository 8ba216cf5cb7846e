//! Soft cluster memberships and the fixed-length search vector.
//!
//! Each minutia descriptor is softly assigned to every codebook centroid:
//! squared distances are shifted by their minimum, negated, exponentiated and
//! normalized to sum to one. The per-minutia membership vectors are summed,
//! the sum is centered around its component mean, and the result is divided
//! by the root mean square taken over the *minutia count* N, giving a vector
//! with zero component sum and squared norm N.

use alloc::vec;
use alloc::vec::Vec;

use crate::descriptor::{describe_all, DescriptorParams, DescriptorTransform, Minutia, MinutiaDescriptor};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::training::Codebook;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Normalizer threshold below which memberships count as uniform and the
/// index vector as undefined.
pub const DEGENERATE_SS: f64 = 1e-12;

/// Soft assignment of one descriptor over the codebook: positive weights
/// summing to one, largest weight at the nearest centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    values: Vec<f64>,
}

impl Membership {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fixed-length search vector of one fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexVector {
    values: Vec<f64>,
    n_minutiae: usize,
}

impl IndexVector {
    /// Wraps raw values; intended for deserialization. `n_minutiae` is the
    /// minutia count the vector was built from.
    pub fn from_parts(values: Vec<f64>, n_minutiae: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "index vector values must be finite".into(),
            ));
        }
        if n_minutiae == 0 {
            return Err(Error::EmptyTemplate);
        }
        Ok(IndexVector { values, n_minutiae })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_minutiae(&self) -> usize {
        self.n_minutiae
    }

    /// Euclidean distance to another vector of the same length.
    pub fn distance(&self, other: &IndexVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = a - b;
                d * d
            })
            .sum::<f64>()
            .sqrt())
    }
}

/// Options for [`index_vector`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndexParams {
    /// Scale the vector by `1/sqrt(N)` so its norm is count-independent.
    /// Off by default: the plain aggregation has squared norm N.
    pub normalize_unit: bool,
}

/// Soft membership of a descriptor over the codebook centroids.
pub fn membership(v: &MinutiaDescriptor, cb: &Codebook) -> Result<Membership> {
    if v.len() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            got: v.len(),
        });
    }
    let d: Vec<f64> = cb
        .centroids()
        .iter()
        .map(|c| {
            c.iter()
                .zip(v.values())
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum()
        })
        .collect();
    Ok(membership_from_sq_distances(&d))
}

/// Membership from raw squared distances: shift by the minimum, exponentiate
/// the negations, normalize by the sum.
///
/// The nearest cluster contributes `exp(0) = 1`, so the normalizer is always
/// at least one and no division-by-zero path exists. Exponent underflow for
/// far clusters flushes to zero, which the normalization absorbs.
pub fn membership_from_sq_distances(sq_distances: &[f64]) -> Membership {
    let md = sq_distances.iter().copied().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = sq_distances.iter().map(|&d| (-(d - md)).exp()).collect();
    let s: f64 = e.iter().sum();
    Membership {
        values: e.iter().map(|&x| x / s).collect(),
    }
}

/// Aggregates per-minutia memberships into the fingerprint's search vector.
///
/// Fails with [`Error::EmptyTemplate`] on an empty list, with
/// [`Error::DegenerateVector`] when the summed memberships are uniform.
pub fn index_vector(memberships: &[Membership]) -> Result<IndexVector> {
    index_vector_with(memberships, &IndexParams::default())
}

/// [`index_vector`] with explicit options.
pub fn index_vector_with(memberships: &[Membership], params: &IndexParams) -> Result<IndexVector> {
    let n = memberships.len();
    if n == 0 {
        return Err(Error::EmptyTemplate);
    }
    let k = memberships[0].len();
    if memberships.iter().any(|m| m.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: memberships.iter().find(|m| m.len() != k).unwrap().len(),
        });
    }

    // Elementwise sum over minutiae.
    let mut sm = vec![0.0; k];
    for m in memberships {
        for (s, &x) in sm.iter_mut().zip(m.values()) {
            *s += x;
        }
    }
    // Center around the component mean.
    let s: f64 = sm.iter().sum::<f64>() / k as f64;
    for v in &mut sm {
        *v -= s;
    }
    // Root mean square over the minutia count, as defined.
    let ss = (sm.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if ss < DEGENERATE_SS {
        return Err(Error::DegenerateVector);
    }
    let scale = if params.normalize_unit {
        ss * (n as f64).sqrt()
    } else {
        ss
    };
    for v in &mut sm {
        *v /= scale;
    }
    Ok(IndexVector {
        values: sm,
        n_minutiae: n,
    })
}

/// Full pipeline: descriptors for every surviving minutia, memberships, and
/// the aggregated index vector.
pub fn build_index(
    img: &GrayImage,
    minutiae: &[Minutia],
    t: &DescriptorTransform,
    cb: &Codebook,
    params: &DescriptorParams,
) -> Result<IndexVector> {
    build_index_with(img, minutiae, t, cb, params, &IndexParams::default())
}

/// [`build_index`] with explicit aggregation options.
pub fn build_index_with(
    img: &GrayImage,
    minutiae: &[Minutia],
    t: &DescriptorTransform,
    cb: &Codebook,
    params: &DescriptorParams,
    index_params: &IndexParams,
) -> Result<IndexVector> {
    let described = describe_all(img, minutiae, t, params)?;
    index_from_descriptors_with(&described.descriptors, cb, index_params)
}

/// Memberships plus aggregation for already-computed descriptors.
pub fn index_from_descriptors(
    descriptors: &[MinutiaDescriptor],
    cb: &Codebook,
) -> Result<IndexVector> {
    index_from_descriptors_with(descriptors, cb, &IndexParams::default())
}

/// [`index_from_descriptors`] with explicit aggregation options.
pub fn index_from_descriptors_with(
    descriptors: &[MinutiaDescriptor],
    cb: &Codebook,
    params: &IndexParams,
) -> Result<IndexVector> {
    let memberships: Vec<Membership> = descriptors
        .iter()
        .map(|d| membership(d, cb))
        .collect::<Result<_>>()?;
    index_vector_with(&memberships, params)
}
