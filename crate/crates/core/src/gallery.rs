//! Enrolled records and ranked Euclidean search with a penetration cutoff.
//!
//! The gallery is an in-memory store; persistence, locking and the on-disk
//! format live in the companion crate. Search is an exhaustive scan: distance
//! to every record, ascending sort with ties broken by subject id, truncated
//! to `ceil(N * pr)` entries.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::descriptor::{describe_all, DescriptorParams, DescriptorTransform, Minutia};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::indexvec::{index_from_descriptors_with, IndexParams, IndexVector};
use crate::template::{build_super_template, MatchGates, Template};
use crate::training::Codebook;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// One enrolled finger: identifier, search vector, fused template.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrolledRecord {
    pub subject_id: String,
    pub index_vector: IndexVector,
    pub template: Template,
    /// Caller-supplied timestamp (e.g. Unix seconds); not interpreted here.
    pub enrolled_at: u64,
}

/// Ranked candidate list for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `(subject_id, distance)`, distances non-decreasing.
    pub ranked: Vec<(String, f64)>,
    /// Penetration rate the search ran with.
    pub penetration: f64,
    /// `ceil(N * pr)` at search time.
    pub cutoff: usize,
}

/// Parameters used when enrolling impressions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnrollParams {
    pub descriptor: DescriptorParams,
    pub gates: MatchGates,
    pub index: IndexParams,
}

/// In-memory store of enrolled records, ordered by subject id.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    /// Index-vector dimension every record must match.
    dim: usize,
    records: BTreeMap<String, EnrolledRecord>,
}

impl Gallery {
    /// Creates an empty gallery for `dim`-dimensional index vectors.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Gallery {
            dim,
            records: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, subject_id: &str) -> bool {
        self.records.contains_key(subject_id)
    }

    pub fn get(&self, subject_id: &str) -> Option<&EnrolledRecord> {
        self.records.get(subject_id)
    }

    /// Records in subject-id order.
    pub fn records(&self) -> impl Iterator<Item = &EnrolledRecord> {
        self.records.values()
    }

    /// Inserts an already-built record (deserialization path).
    pub fn insert(&mut self, record: EnrolledRecord) -> Result<()> {
        if record.index_vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: record.index_vector.len(),
            });
        }
        if self.records.contains_key(&record.subject_id) {
            return Err(Error::DuplicateSubject(record.subject_id));
        }
        self.records.insert(record.subject_id.clone(), record);
        Ok(())
    }

    /// Enrolls one finger from one or more impressions.
    ///
    /// Builds a template per impression, fuses them into a super-template
    /// when there are several, and derives the index vector from the fused
    /// descriptors. Nothing is stored if any stage fails.
    pub fn enroll(
        &mut self,
        subject_id: &str,
        impressions: &[(GrayImage, Vec<Minutia>)],
        transform: &DescriptorTransform,
        codebook: &Codebook,
        params: &EnrollParams,
        enrolled_at: u64,
    ) -> Result<&EnrolledRecord> {
        if self.records.contains_key(subject_id) {
            return Err(Error::DuplicateSubject(subject_id.into()));
        }
        if impressions.is_empty() {
            return Err(Error::EmptyTemplate);
        }
        if codebook.k() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: codebook.k(),
            });
        }
        let templates: Vec<Template> = impressions
            .iter()
            .map(|(img, minutiae)| {
                describe_all(img, minutiae, transform, &params.descriptor)
                    .and_then(Template::from_described)
            })
            .collect::<Result<_>>()?;
        let template = build_super_template(&templates, &params.gates)?;
        let index_vector =
            index_from_descriptors_with(template.descriptors(), codebook, &params.index)?;
        let record = EnrolledRecord {
            subject_id: subject_id.into(),
            index_vector,
            template,
            enrolled_at,
        };
        self.records.insert(subject_id.into(), record);
        Ok(self.records.get(subject_id).expect("just inserted"))
    }

    /// Removes a record by id.
    pub fn remove(&mut self, subject_id: &str) -> Result<()> {
        self.records
            .remove(subject_id)
            .map(|_| ())
            .ok_or_else(|| Error::UnknownSubject(subject_id.into()))
    }

    /// Exhaustive ranked search truncated to `ceil(N * pr)` candidates.
    pub fn search(&self, query: &IndexVector, pr: f64) -> Result<SearchResult> {
        if !(pr.is_finite() && pr > 0.0 && pr <= 1.0) {
            return Err(Error::PenetrationOutOfRange(pr));
        }
        if self.records.is_empty() {
            return Err(Error::EmptyGallery);
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        let mut ranked: Vec<(String, f64)> = Vec::with_capacity(self.records.len());
        for record in self.records.values() {
            let d = query.distance(&record.index_vector)?;
            ranked.push((record.subject_id.clone(), d));
        }
        // Ascending distance, ties by subject id (ids are unique, so the
        // order is total and runs are reproducible).
        ranked.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        let cutoff = penetration_cutoff(self.records.len(), pr);
        ranked.truncate(cutoff);
        Ok(SearchResult {
            ranked,
            penetration: pr,
            cutoff,
        })
    }
}

/// `ceil(n * pr)` with a guard against floating-point noise: products within
/// 1e-9 of an integer count as that integer.
pub fn penetration_cutoff(n: usize, pr: f64) -> usize {
    let t = n as f64 * pr;
    let r = t.round();
    let cutoff = if (t - r).abs() < 1e-9 { r } else { t.ceil() };
    (cutoff as usize).clamp(1, n)
}
