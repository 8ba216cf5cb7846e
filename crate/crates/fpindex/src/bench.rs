//! Wall-clock benchmarking of the search stage alone.
//!
//! Timed scope covers distance computation, sorting and truncation for one
//! query; descriptor extraction, index construction and I/O are excluded by
//! construction (queries arrive as prebuilt vectors). Runs are serialized to
//! avoid contention skew.

use std::fmt::Write as _;
use std::time::Instant;

use fpindex_core::gallery::Gallery;
use fpindex_core::indexvec::IndexVector;

use crate::error::Result;

/// Timing summary for the search stage, milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchStats {
    pub gallery_size: usize,
    pub dim: usize,
    pub queries: usize,
    pub repetitions: usize,
    pub penetration: f64,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl BenchStats {
    /// Line-oriented `key=value` report.
    pub fn report(&self) -> String {
        let mut out = String::new();
        writeln!(out, "bench=search").expect("infallible");
        writeln!(out, "gallery_size={}", self.gallery_size).expect("infallible");
        writeln!(out, "dim={}", self.dim).expect("infallible");
        writeln!(out, "queries={}", self.queries).expect("infallible");
        writeln!(out, "repetitions={}", self.repetitions).expect("infallible");
        writeln!(out, "penetration={}", self.penetration).expect("infallible");
        writeln!(out, "mean_ms={:.6}", self.mean_ms).expect("infallible");
        writeln!(out, "p95_ms={:.6}", self.p95_ms).expect("infallible");
        writeln!(out, "min_ms={:.6}", self.min_ms).expect("infallible");
        writeln!(out, "max_ms={:.6}", self.max_ms).expect("infallible");
        out
    }
}

/// Times `search` over the query set, `repetitions` passes, one query at a
/// time. Every search result is consumed so the work cannot be elided.
pub fn bench_search(
    gallery: &Gallery,
    queries: &[IndexVector],
    penetration: f64,
    repetitions: usize,
) -> Result<BenchStats> {
    if queries.is_empty() || repetitions == 0 {
        return Err(fpindex_core::Error::InvalidParameter(
            "need queries and repetitions >= 1".into(),
        )
        .into());
    }
    let mut samples_ms: Vec<f64> = Vec::with_capacity(queries.len() * repetitions);
    let mut checksum = 0.0f64;
    for _ in 0..repetitions {
        for q in queries {
            let start = Instant::now();
            let result = gallery.search(q, penetration)?;
            let elapsed = start.elapsed();
            checksum += result.ranked.first().map(|(_, d)| *d).unwrap_or(0.0);
            samples_ms.push(elapsed.as_secs_f64() * 1e3);
        }
    }
    std::hint::black_box(checksum);
    samples_ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples_ms.len();
    let mean_ms = samples_ms.iter().sum::<f64>() / n as f64;
    let p95_ms = samples_ms[(((n as f64) * 0.95).ceil() as usize - 1).min(n - 1)];
    Ok(BenchStats {
        gallery_size: gallery.len(),
        dim: gallery.dim(),
        queries: queries.len(),
        repetitions,
        penetration,
        mean_ms,
        p95_ms,
        min_ms: samples_ms[0],
        max_ms: samples_ms[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpindex_core::descriptor::{Minutia, MinutiaDescriptor, MinutiaKind};
    use fpindex_core::gallery::EnrolledRecord;
    use fpindex_core::rng::SeededRng;
    use fpindex_core::template::Template;

    fn build_gallery(n: usize, dim: usize, rng: &mut SeededRng) -> Gallery {
        let template = Template::new(
            vec![Minutia::new(0.0, 0.0, 0.0, MinutiaKind::Unknown).unwrap()],
            vec![MinutiaDescriptor::from_values(vec![0.0])],
        )
        .unwrap();
        let mut g = Gallery::new(dim).unwrap();
        for i in 0..n {
            g.insert(EnrolledRecord {
                subject_id: format!("s{i:05}"),
                index_vector: IndexVector::from_parts(
                    (0..dim).map(|_| rng.normal()).collect(),
                    1,
                )
                .unwrap(),
                template: template.clone(),
                enrolled_at: 0,
            })
            .unwrap();
        }
        g
    }

    #[test]
    fn timings_positive_finite_and_reported() {
        let mut rng = SeededRng::new(1);
        let g = build_gallery(200, 16, &mut rng);
        let queries: Vec<IndexVector> = (0..5)
            .map(|_| IndexVector::from_parts((0..16).map(|_| rng.normal()).collect(), 1).unwrap())
            .collect();
        let stats = bench_search(&g, &queries, 0.2, 3).unwrap();
        assert!(stats.mean_ms > 0.0 && stats.mean_ms.is_finite());
        assert!(stats.p95_ms >= stats.mean_ms * 0.0);
        assert!(stats.max_ms >= stats.min_ms);
        let report = stats.report();
        assert!(report.contains("bench=search"));
        assert!(report.contains("gallery_size=200"));
        assert!(report.contains("mean_ms="));
    }

    #[test]
    fn scaling_is_roughly_linear() {
        // Doubling the gallery should land within [1.5x, 3x] of the baseline.
        let mut rng = SeededRng::new(2);
        let small = build_gallery(4000, 64, &mut rng);
        let big = build_gallery(8000, 64, &mut rng);
        let queries: Vec<IndexVector> = (0..8)
            .map(|_| IndexVector::from_parts((0..64).map(|_| rng.normal()).collect(), 1).unwrap())
            .collect();
        // Warm up, then measure.
        bench_search(&small, &queries, 1.0, 1).unwrap();
        bench_search(&big, &queries, 1.0, 1).unwrap();
        let a = bench_search(&small, &queries, 1.0, 30).unwrap();
        let b = bench_search(&big, &queries, 1.0, 30).unwrap();
        let ratio = b.mean_ms / a.mean_ms;
        assert!(
            (1.3..=3.5).contains(&ratio),
            "scaling ratio {ratio} (small {} ms, big {} ms)",
            a.mean_ms,
            b.mean_ms
        );
    }
}
