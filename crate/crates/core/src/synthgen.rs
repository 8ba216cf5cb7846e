//! Deterministic synthetic fingerprint-like data.
//!
//! A finger is a sinusoidal ridge pattern over a gently modulated orientation
//! field, with minutiae injected as phase singularities (ridge terminations).
//! The pattern is analytic, so impressions are rendered exactly under any
//! rigid motion and the ground truth transports with it. Everything derives
//! from seeds: same seeds, same bytes.
//!
//! This generator trades realism for analyzability; it exists so training,
//! enrollment and evaluation can run end-to-end without real biometric data.

use alloc::vec::Vec;

use crate::descriptor::{Minutia, MinutiaKind};
use crate::error::{Error, Result};
use crate::geom::{normalize_angle, RigidMotion, TWO_PI};
use crate::imaging::GrayImage;
use crate::rng::SeededRng;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Smooth ridge-field parameters of one synthetic finger.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeParams {
    /// Rendered image side, pixels (square, 500 dpi).
    pub size: usize,
    /// Ridge period along the normal direction, pixels.
    pub period: f64,
    /// Base ridge-normal direction, radians.
    pub orientation: f64,
    /// Phase modulation terms: (amplitude, freq_x, freq_y, phase).
    pub modulation: Vec<(f64, f64, f64, f64)>,
    /// Ridge contrast amplitude around the mid gray level.
    pub contrast: f64,
}

/// Generation knobs for [`gen_finger`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub size: usize,
    /// Inclusive ridge-period range, pixels.
    pub period_range: (f64, f64),
    /// Inclusive minutia-count range.
    pub minutiae_range: (usize, usize),
    /// Minimum pairwise minutia separation, pixels.
    pub min_separation: f64,
    /// Minutiae are placed within this radius of the image center, leaving
    /// room for descriptor support under impression motion.
    pub placement_radius: f64,
    pub contrast: f64,
    /// Modulation amplitude (radians of phase swing).
    pub modulation_amp: f64,
    /// Inclusive modulation wavelength range, pixels.
    pub modulation_wavelength: (f64, f64),
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            size: 320,
            period_range: (8.0, 11.0),
            minutiae_range: (24, 36),
            min_separation: 12.0,
            placement_radius: 70.0,
            contrast: 60.0,
            modulation_amp: 1.8,
            modulation_wavelength: (280.0, 420.0),
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        if self.size < 64 {
            return Err(Error::InvalidParameter("size must be >= 64".into()));
        }
        if self.minutiae_range.0 < 15 || self.minutiae_range.1 < self.minutiae_range.0 {
            return Err(Error::InvalidParameter(
                "minutiae range must be within [15, ..] and ordered".into(),
            ));
        }
        if !(self.period_range.0 > 2.0 && self.period_range.1 >= self.period_range.0) {
            return Err(Error::InvalidParameter("bad period range".into()));
        }
        Ok(())
    }
}

/// A synthetic finger: seeded field parameters plus ground-truth minutiae
/// (with their phase charges, needed to evaluate the pattern).
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFinger {
    pub seed: u64,
    pub ridge_params: RidgeParams,
    ground_truth: Vec<Minutia>,
    charges: Vec<f64>,
}

impl SyntheticFinger {
    pub fn ground_truth_minutiae(&self) -> &[Minutia] {
        &self.ground_truth
    }

    /// Phase at a point: carrier plus modulation plus singular terms.
    fn phase(&self, x: f64, y: f64) -> f64 {
        let rp = &self.ridge_params;
        let (s, c) = rp.orientation.sin_cos();
        let mut phi = TWO_PI / rp.period * (x * c + y * s);
        for &(amp, fx, fy, p0) in &rp.modulation {
            phi += amp * (TWO_PI * (x * fx + y * fy) + p0).sin();
        }
        for (m, &q) in self.ground_truth.iter().zip(&self.charges) {
            phi += q * (y - m.y).atan2(x - m.x);
        }
        phi
    }

    /// Gradient of the smooth phase part at a point; `skip` excludes one
    /// minutia's own singular term (finite everywhere else).
    fn smooth_phase_gradient(&self, x: f64, y: f64, skip: Option<usize>) -> (f64, f64) {
        let rp = &self.ridge_params;
        let (s, c) = rp.orientation.sin_cos();
        let base = TWO_PI / rp.period;
        let mut gx = base * c;
        let mut gy = base * s;
        for &(amp, fx, fy, p0) in &rp.modulation {
            let outer = amp * TWO_PI * (TWO_PI * (x * fx + y * fy) + p0).cos();
            gx += outer * fx;
            gy += outer * fy;
        }
        for (j, (m, &q)) in self.ground_truth.iter().zip(&self.charges).enumerate() {
            if Some(j) == skip {
                continue;
            }
            let dx = x - m.x;
            let dy = y - m.y;
            let r2 = dx * dx + dy * dy;
            if r2 > 1e-9 {
                gx += q * (-dy) / r2;
                gy += q * dx / r2;
            }
        }
        (gx, gy)
    }

    /// Pattern intensity at a real-valued position, in [mid - A, mid + A].
    pub fn pattern(&self, x: f64, y: f64) -> f64 {
        127.5 + self.ridge_params.contrast * self.phase(x, y).cos()
    }

    /// Renders the unperturbed base image at 500 dpi.
    pub fn render(&self) -> GrayImage {
        let n = self.ridge_params.size;
        let mut pixels = Vec::with_capacity(n * n);
        for y in 0..n {
            for x in 0..n {
                pixels.push(quantize(self.pattern(x as f64, y as f64)));
            }
        }
        GrayImage::new(n, n, pixels, 500).expect("dimensions are valid")
    }
}

fn quantize(v: f64) -> u8 {
    (v + 0.5).clamp(0.0, 255.0) as u8
}

/// Generates a finger deterministically from a seed.
pub fn gen_finger(seed: u64) -> SyntheticFinger {
    gen_finger_with(seed, &GenParams::default()).expect("default parameters are valid")
}

/// [`gen_finger`] with explicit generation parameters.
pub fn gen_finger_with(seed: u64, params: &GenParams) -> Result<SyntheticFinger> {
    params.validate()?;
    let mut rng = SeededRng::new(seed);
    let period = rng.f64_in(params.period_range.0, params.period_range.1);
    let orientation = rng.f64_in(0.0, core::f64::consts::PI);
    let mut modulation = Vec::with_capacity(2);
    for _ in 0..2 {
        let amp = rng.f64_in(0.5 * params.modulation_amp, params.modulation_amp);
        let wavelength = rng.f64_in(params.modulation_wavelength.0, params.modulation_wavelength.1);
        let dir = rng.f64_in(0.0, TWO_PI);
        modulation.push((amp, dir.cos() / wavelength, dir.sin() / wavelength, rng.f64_in(0.0, TWO_PI)));
    }
    let ridge_params = RidgeParams {
        size: params.size,
        period,
        orientation,
        modulation,
        contrast: params.contrast,
    };

    let count = params.minutiae_range.0 + rng.index(params.minutiae_range.1 - params.minutiae_range.0 + 1);
    let center = (params.size as f64 - 1.0) / 2.0;
    let mut positions: Vec<(f64, f64)> = Vec::with_capacity(count);
    let mut guard = 0usize;
    while positions.len() < count {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::InvalidParameter(
                "cannot place minutiae: separation too large for the region".into(),
            ));
        }
        let r = params.placement_radius * rng.f64().sqrt();
        let a = rng.f64_in(0.0, TWO_PI);
        let (x, y) = (center + r * a.cos(), center + r * a.sin());
        if positions
            .iter()
            .all(|&(px, py)| ((px - x).powi(2) + (py - y).powi(2)).sqrt() >= params.min_separation)
        {
            positions.push((x, y));
        }
    }
    let charges: Vec<f64> = (0..count)
        .map(|_| if rng.chance(0.5) { 1.0 } else { -1.0 })
        .collect();
    let kinds: Vec<MinutiaKind> = (0..count)
        .map(|_| {
            if rng.chance(0.5) {
                MinutiaKind::RidgeEnding
            } else {
                MinutiaKind::Bifurcation
            }
        })
        .collect();

    // Directions from the smooth flow: ridge tangent is perpendicular to the
    // phase gradient. The placeholder minutiae let us reuse the gradient.
    let mut finger = SyntheticFinger {
        seed,
        ridge_params,
        ground_truth: positions
            .iter()
            .zip(&kinds)
            .map(|(&(x, y), &kind)| Minutia { x, y, theta: 0.0, kind })
            .collect(),
        charges,
    };
    for j in 0..count {
        let (gx, gy) = finger.smooth_phase_gradient(
            finger.ground_truth[j].x,
            finger.ground_truth[j].y,
            Some(j),
        );
        finger.ground_truth[j].theta = normalize_angle(gy.atan2(gx) + core::f64::consts::FRAC_PI_2);
    }
    Ok(finger)
}

/// Impression perturbation magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbParams {
    /// Rotation bound, radians; drawn uniformly in `[-max, max]`.
    pub max_rotation: f64,
    /// Translation bound per axis, pixels.
    pub max_translation: f64,
    /// Additive Gaussian pixel noise sigma, gray levels.
    pub noise_sigma: f64,
    /// Minutia position jitter bound per axis, pixels.
    pub pos_jitter: f64,
    /// Minutia direction jitter bound, radians.
    pub dir_jitter: f64,
    /// Fraction of minutiae dropped (count = floor(rate * n)).
    pub drop_rate: f64,
    /// Fraction of spurious minutiae added (count = floor(rate * n)).
    pub spurious_rate: f64,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams {
            max_rotation: 15f64.to_radians(),
            max_translation: 20.0,
            noise_sigma: 6.0,
            pos_jitter: 2.0,
            dir_jitter: 5f64.to_radians(),
            drop_rate: 0.05,
            spurious_rate: 0.04,
        }
    }
}

impl PerturbParams {
    /// Identity perturbation: the impression equals the base rendering.
    pub fn none() -> Self {
        PerturbParams {
            max_rotation: 0.0,
            max_translation: 0.0,
            noise_sigma: 0.0,
            pos_jitter: 0.0,
            dir_jitter: 0.0,
            drop_rate: 0.0,
            spurious_rate: 0.0,
        }
    }
}

/// One rendered impression with its observed minutiae.
#[derive(Debug, Clone, PartialEq)]
pub struct Impression {
    pub image: GrayImage,
    pub minutiae: Vec<Minutia>,
    /// Ground-truth index per observed minutia; `None` marks a spurious one.
    pub labels: Vec<Option<usize>>,
    /// Motion that mapped finger coordinates into this impression.
    pub motion: RigidMotion,
}

/// Renders a perturbed impression of a finger, deterministic under
/// `(finger seed, impression seed)`.
pub fn gen_impression(f: &SyntheticFinger, seed: u64, perturb: &PerturbParams) -> Impression {
    let mut rng = SeededRng::new(seed ^ f.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n = f.ridge_params.size;
    let center = (n as f64 - 1.0) / 2.0;

    let rot = rng.f64_in(-perturb.max_rotation, perturb.max_rotation);
    let tx = rng.f64_in(-perturb.max_translation, perturb.max_translation);
    let ty = rng.f64_in(-perturb.max_translation, perturb.max_translation);
    // Rotation about the image center followed by translation.
    let (rcx, rcy) = crate::geom::rotate(center, center, rot);
    let motion = RigidMotion {
        rotation: rot,
        translation: (center + tx - rcx, center + ty - rcy),
    };
    let inverse = motion.inverse();

    let mut pixels = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let (sx, sy) = inverse.apply(x as f64, y as f64);
            let mut v = f.pattern(sx, sy);
            if perturb.noise_sigma > 0.0 {
                v += perturb.noise_sigma * rng.normal();
            }
            pixels.push(quantize(v));
        }
    }
    let image = GrayImage::new(n, n, pixels, 500).expect("dimensions are valid");

    // Drop a fixed count of random ground-truth minutiae.
    let gt = f.ground_truth_minutiae();
    let n_drop = (perturb.drop_rate * gt.len() as f64).floor() as usize;
    let mut order: Vec<usize> = (0..gt.len()).collect();
    rng.shuffle(&mut order);
    let mut dropped = alloc::vec![false; gt.len()];
    for &i in order.iter().take(n_drop) {
        dropped[i] = true;
    }

    let mut minutiae = Vec::new();
    let mut labels = Vec::new();
    for (i, m) in gt.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        let (mx, my) = motion.apply(m.x, m.y);
        let jx = rng.f64_in(-perturb.pos_jitter, perturb.pos_jitter);
        let jy = rng.f64_in(-perturb.pos_jitter, perturb.pos_jitter);
        let jt = rng.f64_in(-perturb.dir_jitter, perturb.dir_jitter);
        minutiae.push(Minutia {
            x: mx + jx,
            y: my + jy,
            theta: normalize_angle(m.theta + rot + jt),
            kind: m.kind,
        });
        labels.push(Some(i));
    }

    let n_spurious = (perturb.spurious_rate * gt.len() as f64).floor() as usize;
    for _ in 0..n_spurious {
        let r = 0.8 * center * rng.f64().sqrt();
        let a = rng.f64_in(0.0, TWO_PI);
        minutiae.push(Minutia {
            x: center + r * a.cos(),
            y: center + r * a.sin(),
            theta: rng.f64_in(0.0, TWO_PI),
            kind: MinutiaKind::Unknown,
        });
        labels.push(None);
    }

    Impression {
        image,
        minutiae,
        labels,
        motion,
    }
}
