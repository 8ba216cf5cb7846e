//! Penetration-rate vs error-rate evaluation.
//!
//! For a grid of penetration rates, the error rate is the fraction of queries
//! whose true mate does not appear in the truncated candidate list. Search
//! truncation is a prefix of the full ranking, so the curve is computed from
//! each mate's rank in a single full search per query; error rates are
//! non-increasing in the penetration rate by construction.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gallery::{penetration_cutoff, Gallery};
use crate::indexvec::IndexVector;

/// Error rate as a function of penetration rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PrErCurve {
    /// `(penetration_rate, error_rate)`, penetration strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub n_queries: usize,
}

/// Default penetration grid.
pub const DEFAULT_PR_GRID: [f64; 9] = [0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.30, 0.50, 1.00];

/// Computes the curve for labeled queries over a gallery.
///
/// Every `true_subject_id` must be enrolled. Grid values must lie in (0, 1];
/// they are sorted and deduplicated.
pub fn pr_er_curve(
    gallery: &Gallery,
    queries: &[(IndexVector, String)],
    grid: &[f64],
) -> Result<PrErCurve> {
    if queries.is_empty() {
        return Err(Error::InvalidParameter("need at least one query".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("need a nonempty grid".into()));
    }
    for &pr in grid {
        if !(pr.is_finite() && pr > 0.0 && pr <= 1.0) {
            return Err(Error::PenetrationOutOfRange(pr));
        }
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    grid.dedup();

    for (_, mate) in queries {
        if !gallery.contains(mate) {
            return Err(Error::UnenrolledMate(mate.clone()));
        }
    }

    // Rank of the mate in the full ordering, once per query.
    let n = gallery.len();
    let mut mate_ranks: Vec<usize> = Vec::with_capacity(queries.len());
    for (query, mate) in queries {
        let full = gallery.search(query, 1.0)?;
        let rank = full
            .ranked
            .iter()
            .position(|(id, _)| id == mate)
            .expect("mate is enrolled, search at pr=1 returns everything");
        mate_ranks.push(rank + 1);
    }

    let points = grid
        .iter()
        .map(|&pr| {
            let cutoff = penetration_cutoff(n, pr);
            let missed = mate_ranks.iter().filter(|&&rank| rank > cutoff).count();
            (pr, missed as f64 / queries.len() as f64)
        })
        .collect();
    Ok(PrErCurve {
        points,
        n_queries: queries.len(),
    })
}
