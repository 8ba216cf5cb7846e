//! Learning the descriptor transform and the cluster codebook.
//!
//! The transform is the product of a principal-component projection
//! (360 -> 30 by default) and a linear-discriminant projection (30 -> 25),
//! trained on Gabor features labeled by minutia identity: one class holds the
//! features computed for the same minutia of one finger across impressions.
//! The codebook is learned by k-means (k = 200 by default) over the projected
//! descriptors.
//!
//! All training is deterministic for a fixed seed and input order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::descriptor::{DescriptorTransform, Provenance};
use crate::error::{Error, Result};
use crate::mat::{cholesky, jacobi_eigh, solve_lower, solve_lower_transpose, Mat};
use crate::rng::SeededRng;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Default principal-component dimension.
pub const DEFAULT_PCA_DIM: usize = 30;
/// Default discriminant dimension (the descriptor length).
pub const DEFAULT_LDA_DIM: usize = 25;
/// Default codebook size.
pub const DEFAULT_CODEBOOK_SIZE: usize = 200;

/// Feature vectors with class labels; one class groups the features computed
/// for the same minutia of one finger.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureSet {
    features: Vec<Vec<f64>>,
    class_ids: Vec<usize>,
}

impl LabeledFeatureSet {
    pub fn new(features: Vec<Vec<f64>>, class_ids: Vec<usize>) -> Result<Self> {
        if features.len() != class_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: class_ids.len(),
            });
        }
        if let Some(first) = features.first() {
            let dim = first.len();
            if features.iter().any(|f| f.len() != dim) {
                return Err(Error::InvalidParameter(
                    "features must share one dimension".into(),
                ));
            }
        }
        Ok(LabeledFeatureSet {
            features,
            class_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    /// Number of distinct classes.
    pub fn class_count(&self) -> usize {
        let mut ids: Vec<usize> = self.class_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Principal-component projection with the training mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `in_dim x out_dim`; columns are unit-norm eigenvectors, eigenvalues
    /// non-increasing.
    pub matrix: Mat,
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    /// Projects one vector: `(v - mean)^T * matrix`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: v.len(),
            });
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.matrix.vecmul_left(&centered)
    }
}

/// Fits a PCA to the sample set: centering, sample covariance (denominator
/// `n - 1`), leading eigenvectors by a symmetric eigensolve.
pub fn fit_pca(features: &[Vec<f64>], out_dim: usize) -> Result<Pca> {
    let n = features.len();
    if out_dim == 0 {
        return Err(Error::InvalidParameter("out_dim must be >= 1".into()));
    }
    // Covariance rank is at most n - 1 after centering.
    if n < out_dim + 1 {
        return Err(Error::RankDeficient {
            achievable: n.saturating_sub(1),
            requested: out_dim,
        });
    }
    let dim = features[0].len();
    if dim < out_dim {
        return Err(Error::RankDeficient {
            achievable: dim,
            requested: out_dim,
        });
    }
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::InvalidParameter(
            "features must share one dimension".into(),
        ));
    }

    let mut mean = vec![0.0; dim];
    for f in features {
        for (m, &x) in mean.iter_mut().zip(f) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut cov = Mat::zeros(dim, dim);
    let mut centered = vec![0.0; dim];
    for f in features {
        for (c, (&x, &m)) in centered.iter_mut().zip(f.iter().zip(&mean)) {
            *c = x - m;
        }
        for r in 0..dim {
            let cr = centered[r];
            if cr == 0.0 {
                continue;
            }
            for c in r..dim {
                cov[(r, c)] += cr * centered[c];
            }
        }
    }
    let denom = (n - 1) as f64;
    for r in 0..dim {
        for c in r..dim {
            let v = cov[(r, c)] / denom;
            cov[(r, c)] = v;
            cov[(c, r)] = v;
        }
    }

    let (eigenvalues, vectors) = jacobi_eigh(&cov)?;
    let mut matrix = Mat::zeros(dim, out_dim);
    for c in 0..out_dim {
        for r in 0..dim {
            matrix[(r, c)] = vectors[(r, c)];
        }
    }
    Ok(Pca {
        mean,
        matrix,
        eigenvalues: eigenvalues[..out_dim].to_vec(),
    })
}

/// Linear-discriminant projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Lda {
    /// `in_dim x out_dim`; columns are unit-norm generalized eigenvectors of
    /// `inv(S_W) * S_B`, eigenvalues non-increasing.
    pub matrix: Mat,
    pub eigenvalues: Vec<f64>,
    /// Classes removed for having a single member.
    pub dropped_singletons: usize,
}

impl Lda {
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.matrix.vecmul_left(v)
    }
}

/// Fits an LDA on labeled samples.
///
/// Classes with one member are dropped (reported in the result); at least
/// `out_dim + 1` classes must remain. The within-class scatter is regularized
/// as `S_W + lambda I` with `lambda = 1e-4 * trace(S_W) / dim`, and the
/// generalized eigenproblem is solved through a Cholesky reduction.
pub fn fit_lda(samples: &[Vec<f64>], class_ids: &[usize], out_dim: usize) -> Result<Lda> {
    if samples.len() != class_ids.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            got: class_ids.len(),
        });
    }
    if samples.is_empty() || out_dim == 0 {
        return Err(Error::InvalidParameter(
            "need samples and out_dim >= 1".into(),
        ));
    }
    let dim = samples[0].len();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::InvalidParameter(
            "samples must share one dimension".into(),
        ));
    }
    if out_dim > dim {
        return Err(Error::InvalidParameter(format!(
            "out_dim {out_dim} exceeds input dimension {dim}"
        )));
    }

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in class_ids.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let before = by_class.len();
    by_class.retain(|_, members| members.len() >= 2);
    let dropped_singletons = before - by_class.len();
    let n_classes = by_class.len();
    if n_classes < out_dim + 1 {
        return Err(Error::TooFewClasses {
            have: n_classes,
            need: out_dim + 1,
        });
    }

    let kept: usize = by_class.values().map(|m| m.len()).sum();
    let mut global_mean = vec![0.0; dim];
    for members in by_class.values() {
        for &i in members {
            for (g, &x) in global_mean.iter_mut().zip(&samples[i]) {
                *g += x;
            }
        }
    }
    for g in &mut global_mean {
        *g /= kept as f64;
    }

    let mut s_w = Mat::zeros(dim, dim);
    let mut s_b = Mat::zeros(dim, dim);
    for members in by_class.values() {
        let mut class_mean = vec![0.0; dim];
        for &i in members {
            for (c, &x) in class_mean.iter_mut().zip(&samples[i]) {
                *c += x;
            }
        }
        for c in &mut class_mean {
            *c /= members.len() as f64;
        }
        for &i in members {
            let d: Vec<f64> = samples[i]
                .iter()
                .zip(&class_mean)
                .map(|(x, m)| x - m)
                .collect();
            accumulate_outer(&mut s_w, &d);
        }
        let w = (members.len() as f64).sqrt();
        let offset: Vec<f64> = class_mean
            .iter()
            .zip(&global_mean)
            .map(|(c, g)| (c - g) * w)
            .collect();
        accumulate_outer(&mut s_b, &offset);
    }

    let trace: f64 = (0..dim).map(|i| s_w[(i, i)]).sum();
    let lambda = 1e-4 * trace / dim as f64;
    for i in 0..dim {
        s_w[(i, i)] += lambda;
    }

    // inv(S_W) S_B v = mu v  via  S_W = L L^T: solve the symmetric problem
    // for C = inv(L) S_B inv(L)^T, then map eigenvectors back by inv(L)^T.
    let l = cholesky(&s_w)?;
    let mut y = Mat::zeros(dim, dim);
    for c in 0..dim {
        let col = solve_lower(&l, &s_b.column(c));
        for r in 0..dim {
            y[(r, c)] = col[r];
        }
    }
    let yt = y.transpose();
    let mut reduced = Mat::zeros(dim, dim);
    for c in 0..dim {
        let col = solve_lower(&l, &yt.column(c));
        for r in 0..dim {
            reduced[(r, c)] = col[r];
        }
    }
    // Symmetrize against solve round-off.
    let mut sym = Mat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            sym[(r, c)] = 0.5 * (reduced[(r, c)] + reduced[(c, r)]);
        }
    }

    let (eigenvalues, vectors) = jacobi_eigh(&sym)?;
    let mut matrix = Mat::zeros(dim, out_dim);
    for c in 0..out_dim {
        let mut x = solve_lower_transpose(&l, &vectors.column(c));
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut x {
                *v /= norm;
            }
        }
        for r in 0..dim {
            matrix[(r, c)] = x[r];
        }
    }
    Ok(Lda {
        matrix,
        eigenvalues: eigenvalues[..out_dim].to_vec(),
        dropped_singletons,
    })
}

fn accumulate_outer(m: &mut Mat, v: &[f64]) {
    let dim = v.len();
    for r in 0..dim {
        let vr = v[r];
        if vr == 0.0 {
            continue;
        }
        for c in 0..dim {
            m[(r, c)] += vr * v[c];
        }
    }
}

/// Composes PCA and LDA into one descriptor transform; projection through the
/// result equals sequential PCA-then-LDA application.
pub fn compose_transform(pca: &Pca, lda: &Lda) -> Result<DescriptorTransform> {
    let matrix = pca.matrix.matmul(&lda.matrix)?;
    DescriptorTransform::new(pca.mean.clone(), matrix, Provenance::Trained)
}

/// Summary of a transform training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub samples: usize,
    pub classes: usize,
    pub dropped_singletons: usize,
    pub pca_dim: usize,
    pub lda_dim: usize,
}

/// Full transform training: PCA on the raw features, LDA on the projected
/// features, composed into a single linear map.
pub fn train_transform(
    set: &LabeledFeatureSet,
    pca_dim: usize,
    lda_dim: usize,
) -> Result<(DescriptorTransform, TrainReport)> {
    let pca = fit_pca(set.features(), pca_dim)?;
    let projected: Vec<Vec<f64>> = set
        .features()
        .iter()
        .map(|f| pca.apply(f))
        .collect::<Result<_>>()?;
    let lda = fit_lda(&projected, set.class_ids(), lda_dim)?;
    let transform = compose_transform(&pca, &lda)?;
    let report = TrainReport {
        samples: set.len(),
        classes: set.class_count(),
        dropped_singletons: lda.dropped_singletons,
        pca_dim,
        lda_dim,
    };
    Ok((transform, report))
}

/// k-means configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: DEFAULT_CODEBOOK_SIZE,
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// Convergence data recorded while training a codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    /// Assignment/update rounds executed.
    pub iterations: usize,
    /// Sum of squared distances to assigned centroids, final centroids.
    pub final_inertia: f64,
    /// Inertia before each update step, then the final value.
    pub inertia_history: Vec<f64>,
}

/// Cluster centroids in descriptor space.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centroids: Vec<Vec<f64>>,
    pub training_meta: Option<TrainingMeta>,
}

/// Current codebook format version.
pub const CODEBOOK_VERSION: u32 = 1;

impl Codebook {
    /// Builds a codebook from centroid vectors; they must be finite, share a
    /// dimension, and be pairwise distinct.
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::InvalidParameter("need k >= 2 centroids".into()));
        }
        let dim = centroids[0].len();
        if dim == 0 || centroids.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidParameter(
                "centroids must share a nonzero dimension".into(),
            ));
        }
        if centroids.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter("centroids must be finite".into()));
        }
        for a in 0..centroids.len() {
            for b in a + 1..centroids.len() {
                if centroids[a] == centroids[b] {
                    return Err(Error::DuplicateCentroids { a, b });
                }
            }
        }
        Ok(Codebook {
            centroids,
            training_meta: None,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Trains a codebook by k-means with distance-weighted greedy seeding.
///
/// Deterministic for fixed `(data order, k, seed, max_iter, tol)`: fixed
/// seeding draws, fixed iteration order, assignment ties to the lower
/// centroid index, convergence when the largest centroid shift is `<= tol`.
pub fn fit_codebook(points: &[Vec<f64>], params: &KMeansParams) -> Result<Codebook> {
    let n = points.len();
    let k = params.k;
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    if params.max_iter == 0 || !(params.tol.is_finite() && params.tol >= 0.0) {
        return Err(Error::InvalidParameter(
            "max_iter must be >= 1 and tol finite, nonnegative".into(),
        ));
    }
    if n == 0 {
        return Err(Error::TooFewDistinctPoints { distinct: 0, k });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidParameter(
            "points must share one dimension".into(),
        ));
    }
    let distinct = count_distinct(points);
    if distinct < k {
        return Err(Error::TooFewDistinctPoints { distinct, k });
    }

    let mut rng = SeededRng::new(params.seed);
    let mut centroids = seed_centroids(points, k, &mut rng);

    let mut assignment = vec![0usize; n];
    let mut point_d2 = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    for _ in 0..params.max_iter {
        iterations += 1;
        // Assignment step; ties go to the lower index.
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = sq_dist(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
            point_d2[i] = best_d;
            inertia += best_d;
        }
        history.push(inertia);

        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (s, &x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                for (nc, &s) in new_centroids[c].iter_mut().zip(&sums[c]) {
                    *nc = s / counts[c] as f64;
                }
            }
        }
        // Re-seed an empty cluster on the point farthest from its centroid.
        let mut stolen = vec![false; n];
        for c in 0..k {
            if counts[c] == 0 {
                let mut far = None;
                let mut far_d = -1.0;
                for i in 0..n {
                    if !stolen[i] && point_d2[i] > far_d {
                        far_d = point_d2[i];
                        far = Some(i);
                    }
                }
                if let Some(i) = far {
                    stolen[i] = true;
                    new_centroids[c] = points[i].clone();
                }
            }
        }

        let mut shift: f64 = 0.0;
        for c in 0..k {
            shift = shift.max(sq_dist(&centroids[c], &new_centroids[c]).sqrt());
        }
        centroids = new_centroids;
        if shift <= params.tol {
            break;
        }
    }

    // Final inertia against the final centroids.
    let mut final_inertia = 0.0;
    for p in points {
        let mut best = f64::INFINITY;
        for c in &centroids {
            best = best.min(sq_dist(p, c));
        }
        final_inertia += best;
    }
    history.push(final_inertia);

    let mut cb = Codebook::new(centroids)?;
    cb.training_meta = Some(TrainingMeta {
        iterations,
        final_inertia,
        inertia_history: history,
    });
    Ok(cb)
}

/// Distance-weighted greedy seeding: first centroid uniform, each next drawn
/// with probability proportional to the squared distance to the chosen set.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.index(n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.f64() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &d) in d2.iter().enumerate() {
            acc += d;
            if acc > target {
                chosen = Some(i);
                break;
            }
        }
        // Rounding can push the target past the prefix sums; fall back to the
        // last point that is still distinct from every chosen centroid.
        let idx = chosen.unwrap_or_else(|| {
            d2.iter()
                .rposition(|&d| d > 0.0)
                .expect("distinct points guarantee a positive distance")
        });
        let new = points[idx].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &new));
        }
        centroids.push(new);
    }
    centroids
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal))
            .find(|o| *o != core::cmp::Ordering::Equal)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut count = if sorted.is_empty() { 0 } else { 1 };
    for w in sorted.windows(2) {
        if w[0] != w[1] {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(n: usize, dim: usize) -> Vec<Vec<f64>> {
        // Points on a line through a nonzero mean.
        (0..n)
            .map(|i| {
                let t = i as f64 / 3.0 - 1.0;
                (0..dim).map(|d| 2.0 + t * (d as f64 + 1.0)).collect()
            })
            .collect()
    }

    #[test]
    fn pca_degenerate_line() {
        let data = line_data(40, 12);
        let pca = fit_pca(&data, 10).unwrap();
        let l1 = pca.eigenvalues[0];
        assert!(l1 > 0.0);
        for &l in &pca.eigenvalues[1..] {
            assert!(l.abs() <= 1e-9 * l1, "trailing eigenvalue {l}");
        }
    }

    #[test]
    fn pca_mean_projects_to_zero() {
        let data = line_data(40, 12);
        let pca = fit_pca(&data, 4).unwrap();
        let z = pca.apply(&pca.mean.clone()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pca_eigen_order_and_orthonormality() {
        let mut rng = SeededRng::new(5);
        let data: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..8).map(|d| rng.normal() * (1.0 + d as f64)).collect())
            .collect();
        let pca = fit_pca(&data, 8).unwrap();
        assert!(pca.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = pca
                    .matrix
                    .column(i)
                    .iter()
                    .zip(pca.matrix.column(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_too_few_samples() {
        let data = line_data(10, 12);
        match fit_pca(&data, 10) {
            Err(Error::RankDeficient {
                achievable: 9,
                requested: 10,
            }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn lda_requires_enough_classes() {
        let mut rng = SeededRng::new(9);
        let samples: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..6).map(|_| rng.normal()).collect())
            .collect();
        let ids: Vec<usize> = (0..40).map(|i| i % 4).collect();
        match fit_lda(&samples, &ids, 5) {
            Err(Error::TooFewClasses { have: 4, need: 6 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn lda_drops_singletons() {
        let mut rng = SeededRng::new(10);
        let mut samples: Vec<Vec<f64>> = Vec::new();
        let mut ids = Vec::new();
        for class in 0..6 {
            for _ in 0..3 {
                samples.push(
                    (0..4)
                        .map(|d| class as f64 * 2.0 + 0.1 * rng.normal() + d as f64)
                        .collect(),
                );
                ids.push(class);
            }
        }
        // One singleton class.
        samples.push(vec![100.0, 100.0, 100.0, 100.0]);
        ids.push(99);
        let lda = fit_lda(&samples, &ids, 3).unwrap();
        assert_eq!(lda.dropped_singletons, 1);
    }

    #[test]
    fn compose_selector_blocks() {
        // pca = first-3 selector (of 5 dims), lda = first-2 selector.
        let mut pca_m = Mat::zeros(5, 3);
        for i in 0..3 {
            pca_m[(i, i)] = 1.0;
        }
        let pca = Pca {
            mean: vec![0.0; 5],
            matrix: pca_m,
            eigenvalues: vec![3.0, 2.0, 1.0],
        };
        let mut lda_m = Mat::zeros(3, 2);
        for i in 0..2 {
            lda_m[(i, i)] = 1.0;
        }
        let lda = Lda {
            matrix: lda_m,
            eigenvalues: vec![1.0, 1.0],
            dropped_singletons: 0,
        };
        let t = compose_transform(&pca, &lda).unwrap();
        assert_eq!(t.input_dim(), 5);
        assert_eq!(t.output_dim(), 2);
        let v = [7.0, 8.0, 9.0, 10.0, 11.0];
        let feat = crate::descriptor::GaborFeature::from_values(v.to_vec());
        let d = crate::descriptor::project(&feat, &t).unwrap();
        assert_eq!(d.values(), &[7.0, 8.0]);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let mut rng = SeededRng::new(77);
        let data: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..10).map(|_| rng.normal()).collect())
            .collect();
        let ids: Vec<usize> = (0..60).map(|i| i % 12).collect();
        let pca = fit_pca(&data, 6).unwrap();
        let projected: Vec<Vec<f64>> = data.iter().map(|f| pca.apply(f).unwrap()).collect();
        let lda = fit_lda(&projected, &ids, 4).unwrap();
        let t = compose_transform(&pca, &lda).unwrap();
        for f in data.iter().take(10) {
            let via_t = crate::descriptor::project(
                &crate::descriptor::GaborFeature::from_values(f.clone()),
                &t,
            )
            .unwrap();
            let seq = lda.apply(&pca.apply(f).unwrap()).unwrap();
            for (a, b) in via_t.values().iter().zip(&seq) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn kmeans_perfect_fit() {
        let points: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 10.0, 0.0]).collect();
        let cb = fit_codebook(
            &points,
            &KMeansParams {
                k: 5,
                seed: 3,
                ..KMeansParams::default()
            },
        )
        .unwrap();
        let meta = cb.training_meta.as_ref().unwrap();
        assert!(meta.final_inertia == 0.0);
        // Centroids equal the points, in some order.
        for p in &points {
            assert!(cb.centroids().iter().any(|c| c == p));
        }
    }

    #[test]
    fn kmeans_two_blobs() {
        let mut rng = SeededRng::new(11);
        let mut points = Vec::new();
        for _ in 0..50 {
            points.push(vec![rng.normal() * 0.01, rng.normal() * 0.01]);
        }
        for _ in 0..50 {
            points.push(vec![10.0 + rng.normal() * 0.01, rng.normal() * 0.01]);
        }
        let cb = fit_codebook(
            &points,
            &KMeansParams {
                k: 2,
                seed: 4,
                ..KMeansParams::default()
            },
        )
        .unwrap();
        let mean = |range: core::ops::Range<usize>| {
            let mut m = [0.0, 0.0];
            for p in &points[range.clone()] {
                m[0] += p[0] / 50.0;
                m[1] += p[1] / 50.0;
            }
            m
        };
        for m in [mean(0..50), mean(50..100)] {
            assert!(cb
                .centroids()
                .iter()
                .any(|c| (c[0] - m[0]).abs() < 1e-6 && (c[1] - m[1]).abs() < 1e-6));
        }
    }

    #[test]
    fn kmeans_deterministic() {
        let mut rng = SeededRng::new(12);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.normal()).collect())
            .collect();
        let params = KMeansParams {
            k: 8,
            seed: 21,
            ..KMeansParams::default()
        };
        let a = fit_codebook(&points, &params).unwrap();
        let b = fit_codebook(&points, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kmeans_inertia_nonincreasing() {
        let mut rng = SeededRng::new(13);
        let points: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..4).map(|_| rng.normal()).collect())
            .collect();
        let cb = fit_codebook(
            &points,
            &KMeansParams {
                k: 10,
                seed: 5,
                ..KMeansParams::default()
            },
        )
        .unwrap();
        let h = &cb.training_meta.as_ref().unwrap().inertia_history;
        assert!(h.len() >= 2);
        for w in h.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "inertia rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn kmeans_rejects_too_few_distinct() {
        let points = vec![vec![1.0, 1.0]; 10];
        match fit_codebook(
            &points,
            &KMeansParams {
                k: 3,
                seed: 0,
                ..KMeansParams::default()
            },
        ) {
            Err(Error::TooFewDistinctPoints { distinct: 1, k: 3 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn codebook_rejects_duplicates() {
        let c = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 4.0]];
        assert!(matches!(
            Codebook::new(c),
            Err(Error::DuplicateCentroids { a: 0, b: 1 })
        ));
    }
}
