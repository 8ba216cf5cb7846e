//! Fingerprint templates and multi-impression fusion.
//!
//! A template holds minutiae with their descriptors. Multiple impressions of
//! one finger are fused into a super-template: the best rigid alignment is
//! estimated by voting over candidate minutia pairs, minutiae are matched
//! greedily nearest-first under position/direction gates, matched minutiae
//! and descriptors are averaged with source-count weights, and unmatched
//! minutiae of the new impression are carried over.

use alloc::vec::Vec;

use crate::descriptor::{Described, Minutia, MinutiaDescriptor};
use crate::error::{Error, Result};
use crate::geom::{angle_diff, normalize_angle, weighted_circular_mean, RigidMotion};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Minutiae with parallel descriptors; `source_count` counts the impressions
/// merged into it (1 for a raw template).
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    minutiae: Vec<Minutia>,
    descriptors: Vec<MinutiaDescriptor>,
    source_count: u32,
}

impl Template {
    pub fn new(minutiae: Vec<Minutia>, descriptors: Vec<MinutiaDescriptor>) -> Result<Self> {
        Template::with_source_count(minutiae, descriptors, 1)
    }

    pub fn with_source_count(
        minutiae: Vec<Minutia>,
        descriptors: Vec<MinutiaDescriptor>,
        source_count: u32,
    ) -> Result<Self> {
        if minutiae.is_empty() {
            return Err(Error::EmptyTemplate);
        }
        if minutiae.len() != descriptors.len() {
            return Err(Error::DimensionMismatch {
                expected: minutiae.len(),
                got: descriptors.len(),
            });
        }
        if source_count == 0 {
            return Err(Error::InvalidParameter("source_count must be >= 1".into()));
        }
        Ok(Template {
            minutiae,
            descriptors,
            source_count,
        })
    }

    pub fn from_described(d: Described) -> Result<Self> {
        Template::new(d.minutiae, d.descriptors)
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }

    pub fn minutiae(&self) -> &[Minutia] {
        &self.minutiae
    }

    pub fn descriptors(&self) -> &[MinutiaDescriptor] {
        &self.descriptors
    }

    pub fn source_count(&self) -> u32 {
        self.source_count
    }
}

/// Gates and vote-binning parameters for minutia correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchGates {
    /// Maximum position distance after alignment, pixels.
    pub position: f64,
    /// Maximum direction difference after alignment, radians.
    pub direction: f64,
    /// Rotation vote bin width, radians.
    pub rotation_bin: f64,
    /// Translation vote bin width, pixels.
    pub translation_bin: f64,
}

impl Default for MatchGates {
    fn default() -> Self {
        MatchGates {
            position: 12.0,
            direction: 20f64.to_radians(),
            rotation_bin: 10f64.to_radians(),
            translation_bin: 8.0,
        }
    }
}

/// One-to-one minutia pairing between two templates plus the rigid motion
/// aligning the second onto the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    /// `(index_in_a, index_in_b)` pairs.
    pub pairs: Vec<(usize, usize)>,
    /// Motion mapping template-b coordinates into template-a's frame.
    pub transform: RigidMotion,
}

/// Estimates the best rigid alignment of `b` onto `a` by voting, then matches
/// minutiae greedily nearest-first under the gates, one-to-one.
///
/// Every pair `(p in a, q in b)` proposes the rotation `theta_p - theta_q`
/// and the implied translation; the densest vote bin wins and its proposals
/// are averaged into the alignment estimate. The estimate is then refined by
/// a least-squares rigid fit over the matched pairs and the matching is
/// repeated once, which removes most of the bin-quantization error.
pub fn correspond(a: &Template, b: &Template, gates: &MatchGates) -> Correspondence {
    let mut transform = vote_alignment(a, b, gates);
    let mut pairs = greedy_pairs(a, b, &transform, gates);
    if pairs.len() >= 2 {
        if let Some(refined) = fit_rigid(a, b, &pairs) {
            let refined_pairs = greedy_pairs(a, b, &refined, gates);
            if refined_pairs.len() >= pairs.len() {
                transform = refined;
                pairs = refined_pairs;
            }
        }
    }
    Correspondence { pairs, transform }
}

/// Least-squares rigid motion taking the paired minutiae of `b` onto `a`.
fn fit_rigid(a: &Template, b: &Template, pairs: &[(usize, usize)]) -> Option<RigidMotion> {
    let n = pairs.len() as f64;
    let (mut cax, mut cay, mut cbx, mut cby) = (0.0, 0.0, 0.0, 0.0);
    for &(i, j) in pairs {
        cax += a.minutiae[i].x;
        cay += a.minutiae[i].y;
        cbx += b.minutiae[j].x;
        cby += b.minutiae[j].y;
    }
    cax /= n;
    cay /= n;
    cbx /= n;
    cby /= n;

    let (mut dot, mut cross) = (0.0, 0.0);
    for &(i, j) in pairs {
        let ax = a.minutiae[i].x - cax;
        let ay = a.minutiae[i].y - cay;
        let bx = b.minutiae[j].x - cbx;
        let by = b.minutiae[j].y - cby;
        dot += bx * ax + by * ay;
        cross += bx * ay - by * ax;
    }
    if dot == 0.0 && cross == 0.0 {
        return None;
    }
    let rotation = cross.atan2(dot);
    let (rbx, rby) = crate::geom::rotate(cbx, cby, rotation);
    Some(RigidMotion {
        rotation: normalize_angle(rotation),
        translation: (cax - rbx, cay - rby),
    })
}

/// Vote bin accumulator: count, rotation vector sum, translation sum.
type VoteBin = (usize, f64, f64, f64, f64);

fn vote_alignment(a: &Template, b: &Template, gates: &MatchGates) -> RigidMotion {
    use alloc::collections::BTreeMap;

    let mut bins: BTreeMap<(i64, i64, i64), VoteBin> = BTreeMap::new();
    for p in a.minutiae() {
        for q in b.minutiae() {
            let rot = normalize_angle(p.theta - q.theta);
            let (qx, qy) = crate::geom::rotate(q.x, q.y, rot);
            let tx = p.x - qx;
            let ty = p.y - qy;
            let key = (
                (rot / gates.rotation_bin).floor() as i64,
                (tx / gates.translation_bin).floor() as i64,
                (ty / gates.translation_bin).floor() as i64,
            );
            let e = bins.entry(key).or_insert((0, 0.0, 0.0, 0.0, 0.0));
            e.0 += 1;
            e.1 += rot.cos();
            e.2 += rot.sin();
            e.3 += tx;
            e.4 += ty;
        }
    }
    // Densest bin wins; BTreeMap order makes count ties deterministic.
    let mut best: Option<(usize, f64, f64, f64, f64)> = None;
    for &v in bins.values() {
        match best {
            Some(b) if v.0 <= b.0 => {}
            _ => best = Some(v),
        }
    }
    match best {
        Some((count, cx, cy, tx, ty)) if count > 0 => {
            let rotation = if cx == 0.0 && cy == 0.0 {
                0.0
            } else {
                normalize_angle(cy.atan2(cx))
            };
            RigidMotion {
                rotation,
                translation: (tx / count as f64, ty / count as f64),
            }
        }
        _ => RigidMotion::identity(),
    }
}

fn greedy_pairs(
    a: &Template,
    b: &Template,
    transform: &RigidMotion,
    gates: &MatchGates,
) -> Vec<(usize, usize)> {
    let aligned: Vec<Minutia> = b
        .minutiae()
        .iter()
        .map(|m| transform_minutia(m, transform))
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in a.minutiae().iter().enumerate() {
        for (j, q) in aligned.iter().enumerate() {
            let dx = p.x - q.x;
            let dy = p.y - q.y;
            let dist = (dx * dx + dy * dy).sqrt();
            if dist <= gates.position && angle_diff(p.theta, q.theta) <= gates.direction {
                candidates.push((dist, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut used_a = alloc::vec![false; a.len()];
    let mut used_b = alloc::vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

fn transform_minutia(m: &Minutia, t: &RigidMotion) -> Minutia {
    let (x, y) = t.apply(m.x, m.y);
    Minutia {
        x,
        y,
        theta: normalize_angle(m.theta + t.rotation),
        kind: m.kind,
    }
}

/// Merges a template into the super-template under a correspondence.
///
/// Paired minutiae: positions, directions (circularly) and descriptors are
/// averaged with weights `(super.source_count, t.source_count)` after mapping
/// `t` into the super-template's frame. Unpaired minutiae of `t` are
/// transformed and appended, then dropped again if they land within 4 px and
/// 10 degrees of an existing minutia (double-add guard). The source count
/// accumulates.
pub fn merge(super_t: &Template, t: &Template, corr: &Correspondence) -> Result<Template> {
    const DEDUP_DIST: f64 = 4.0;
    const DEDUP_ANGLE: f64 = core::f64::consts::PI / 18.0; // 10 degrees

    let w_s = super_t.source_count() as f64;
    let w_t = t.source_count() as f64;
    let w_total = w_s + w_t;

    let mut minutiae = super_t.minutiae.clone();
    let mut descriptors = super_t.descriptors.clone();
    let mut paired_b = alloc::vec![false; t.len()];

    for &(i, j) in &corr.pairs {
        paired_b[j] = true;
        let q = transform_minutia(&t.minutiae[j], &corr.transform);
        let p = &mut minutiae[i];
        p.x = (w_s * p.x + w_t * q.x) / w_total;
        p.y = (w_s * p.y + w_t * q.y) / w_total;
        // Zero resultant (opposite directions) keeps the super-template's.
        p.theta = weighted_circular_mean(&[(p.theta, w_s), (q.theta, w_t)]).unwrap_or(p.theta);
        let d = &mut descriptors[i];
        let merged: Vec<f64> = d
            .values()
            .iter()
            .zip(t.descriptors[j].values())
            .map(|(a, b)| (w_s * a + w_t * b) / w_total)
            .collect();
        *d = MinutiaDescriptor::from_values(merged);
    }

    let appended_from = minutiae.len();
    for (j, m) in t.minutiae.iter().enumerate() {
        if !paired_b[j] {
            minutiae.push(transform_minutia(m, &corr.transform));
            descriptors.push(t.descriptors[j].clone());
        }
    }

    // Double-add guard: drop an appended minutia that duplicates an earlier
    // one (a gate miss). Existing minutiae are never touched.
    let mut keep = alloc::vec![true; minutiae.len()];
    for idx in appended_from..minutiae.len() {
        for prev in 0..idx {
            if !keep[prev] {
                continue;
            }
            let dm = &minutiae[idx];
            let pm = &minutiae[prev];
            let dx = dm.x - pm.x;
            let dy = dm.y - pm.y;
            if (dx * dx + dy * dy).sqrt() < DEDUP_DIST
                && angle_diff(dm.theta, pm.theta) < DEDUP_ANGLE
            {
                keep[idx] = false;
                break;
            }
        }
    }
    let mut kept_minutiae = Vec::with_capacity(minutiae.len());
    let mut kept_descriptors = Vec::with_capacity(descriptors.len());
    for (i, k) in keep.iter().enumerate() {
        if *k {
            kept_minutiae.push(minutiae[i]);
            kept_descriptors.push(descriptors[i].clone());
        }
    }

    Template::with_source_count(
        kept_minutiae,
        kept_descriptors,
        super_t.source_count + t.source_count,
    )
}

/// Folds templates into one super-template: the first seeds it, every other
/// is aligned, corresponded and merged in input order.
pub fn build_super_template(templates: &[Template], gates: &MatchGates) -> Result<Template> {
    let mut iter = templates.iter();
    let first = iter.next().ok_or(Error::EmptyTemplate)?;
    let mut super_t = first.clone();
    for t in iter {
        let corr = correspond(&super_t, t, gates);
        super_t = merge(&super_t, t, &corr)?;
    }
    Ok(super_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::MinutiaKind;
    use crate::geom::TWO_PI;
    use crate::rng::SeededRng;
    use alloc::vec;

    fn descriptor_of(seed: f64) -> MinutiaDescriptor {
        MinutiaDescriptor::from_values((0..4).map(|i| seed + i as f64).collect())
    }

    fn random_template(rng: &mut SeededRng, n: usize) -> Template {
        // Well-separated minutiae so self-correspondence is unambiguous.
        let mut minutiae = Vec::new();
        let mut descriptors = Vec::new();
        while minutiae.len() < n {
            let x = rng.f64_in(40.0, 280.0);
            let y = rng.f64_in(40.0, 280.0);
            let ok = minutiae
                .iter()
                .all(|m: &Minutia| ((m.x - x).powi(2) + (m.y - y).powi(2)).sqrt() > 15.0);
            if ok {
                let theta = rng.f64_in(0.0, TWO_PI);
                minutiae.push(Minutia::new(x, y, theta, MinutiaKind::Unknown).unwrap());
                descriptors.push(descriptor_of(rng.f64()));
            }
        }
        Template::new(minutiae, descriptors).unwrap()
    }

    fn moved(t: &Template, motion: &RigidMotion, jitter: f64, rng: &mut SeededRng) -> Template {
        let minutiae: Vec<Minutia> = t
            .minutiae()
            .iter()
            .map(|m| {
                let mut moved = transform_minutia(m, motion);
                moved.x += rng.f64_in(-jitter, jitter);
                moved.y += rng.f64_in(-jitter, jitter);
                moved
            })
            .collect();
        Template::new(minutiae, t.descriptors().to_vec()).unwrap()
    }

    #[test]
    fn self_correspondence_is_identity() {
        let mut rng = SeededRng::new(1);
        let t = random_template(&mut rng, 20);
        let corr = correspond(&t, &t, &MatchGates::default());
        assert_eq!(corr.pairs.len(), t.len());
        for (i, j) in &corr.pairs {
            assert_eq!(i, j);
        }
        assert!(corr.transform.rotation.min(TWO_PI - corr.transform.rotation) < 1e-9);
        assert!(corr.transform.translation.0.abs() < 1e-9);
        assert!(corr.transform.translation.1.abs() < 1e-9);
    }

    #[test]
    fn translation_recovered() {
        let mut rng = SeededRng::new(2);
        let a = random_template(&mut rng, 20);
        let motion = RigidMotion {
            rotation: 0.0,
            translation: (5.0, 3.0),
        };
        let b = moved(&a, &motion, 0.0, &mut rng);
        // Align b back onto a: the inverse translation.
        let corr = correspond(&a, &b, &MatchGates::default());
        assert_eq!(corr.pairs.len(), a.len());
        assert!((corr.transform.translation.0 + 5.0).abs() < 1.0);
        assert!((corr.transform.translation.1 + 3.0).abs() < 1.0);
    }

    #[test]
    fn rotation_recovered_with_jitter() {
        let mut rng = SeededRng::new(3);
        let a = random_template(&mut rng, 25);
        // Rotate 30 degrees about the image center (160, 160).
        let rot = 30f64.to_radians();
        let (cx, cy) = (160.0, 160.0);
        let (rx, ry) = crate::geom::rotate(-cx, -cy, rot);
        let motion = RigidMotion {
            rotation: rot,
            translation: (rx + cx, ry + cy),
        };
        let b = moved(&a, &motion, 1.0, &mut rng);
        let corr = correspond(&a, &b, &MatchGates::default());
        assert!(
            corr.pairs.len() as f64 >= 0.9 * a.len() as f64,
            "only {} of {} paired",
            corr.pairs.len(),
            a.len()
        );
        let err = angle_diff(corr.transform.rotation, TWO_PI - rot);
        assert!(err <= 3f64.to_radians(), "rotation error {err}");
    }

    #[test]
    fn merge_with_self_is_idempotent() {
        let mut rng = SeededRng::new(4);
        let t = random_template(&mut rng, 15);
        let corr = correspond(&t, &t, &MatchGates::default());
        let merged = merge(&t, &t, &corr).unwrap();
        assert_eq!(merged.len(), t.len());
        assert_eq!(merged.source_count(), 2);
        for (a, b) in merged.minutiae().iter().zip(t.minutiae()) {
            assert!((a.x - b.x).abs() < 1e-9);
            assert!((a.y - b.y).abs() < 1e-9);
            assert!(angle_diff(a.theta, b.theta) < 1e-9);
        }
        for (a, b) in merged.descriptors().iter().zip(t.descriptors()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x, y, "average of equal descriptors must be exact");
            }
        }
    }

    #[test]
    fn merge_counts_partial_overlap() {
        // a has 20, b has 20 of which 15 correspond -> merged has 25.
        let mut rng = SeededRng::new(5);
        let a = random_template(&mut rng, 20);
        let mut b_minutiae: Vec<Minutia> = a.minutiae()[..15].to_vec();
        // Five far-away extras.
        for i in 0..5 {
            b_minutiae.push(
                Minutia::new(400.0 + 30.0 * i as f64, 400.0, 1.0, MinutiaKind::Unknown).unwrap(),
            );
        }
        let b = Template::new(
            b_minutiae,
            (0..20).map(|i| descriptor_of(i as f64)).collect(),
        )
        .unwrap();
        let corr = correspond(&a, &b, &MatchGates::default());
        assert_eq!(corr.pairs.len(), 15);
        let merged = merge(&a, &b, &corr).unwrap();
        assert_eq!(merged.len(), 25);
    }

    #[test]
    fn merge_direction_circular_mean() {
        let a = Template::new(
            vec![Minutia::new(100.0, 100.0, 10f64.to_radians(), MinutiaKind::Unknown).unwrap()],
            vec![descriptor_of(0.0)],
        )
        .unwrap();
        let b = Template::new(
            vec![Minutia::new(100.0, 100.0, 350f64.to_radians(), MinutiaKind::Unknown).unwrap()],
            vec![descriptor_of(0.0)],
        )
        .unwrap();
        let corr = Correspondence {
            pairs: vec![(0, 0)],
            transform: RigidMotion::identity(),
        };
        let merged = merge(&a, &b, &corr).unwrap();
        let theta = merged.minutiae()[0].theta;
        assert!(theta.min(TWO_PI - theta) < 1e-9, "theta {theta}");
    }

    #[test]
    fn super_template_of_identical_inputs() {
        let mut rng = SeededRng::new(6);
        let t = random_template(&mut rng, 18);
        let s = build_super_template(
            &[t.clone(), t.clone(), t.clone()],
            &MatchGates::default(),
        )
        .unwrap();
        assert_eq!(s.len(), t.len());
        assert_eq!(s.source_count(), 3);
    }

    #[test]
    fn single_template_passthrough() {
        let mut rng = SeededRng::new(7);
        let t = random_template(&mut rng, 16);
        let s = build_super_template(core::slice::from_ref(&t), &MatchGates::default()).unwrap();
        assert_eq!(s, t);
        assert_eq!(s.source_count(), 1);
    }

    #[test]
    fn merge_never_shrinks_nor_exceeds_sum() {
        let mut rng = SeededRng::new(8);
        for _ in 0..10 {
            let a = random_template(&mut rng, 12);
            let b = random_template(&mut rng, 14);
            let corr = correspond(&a, &b, &MatchGates::default());
            let merged = merge(&a, &b, &corr).unwrap();
            assert!(merged.len() >= a.len());
            assert!(merged.len() <= a.len() + b.len());
        }
    }

    #[test]
    fn correspondence_pair_count_roughly_symmetric() {
        let mut rng = SeededRng::new(9);
        let a = random_template(&mut rng, 20);
        let motion = RigidMotion {
            rotation: 0.1,
            translation: (4.0, -6.0),
        };
        let b = moved(&a, &motion, 0.5, &mut rng);
        let ab = correspond(&a, &b, &MatchGates::default()).pairs.len() as i64;
        let ba = correspond(&b, &a, &MatchGates::default()).pairs.len() as i64;
        assert!((ab - ba).abs() <= 1, "{ab} vs {ba}");
    }
}
