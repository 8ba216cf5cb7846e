//! Gabor wavelet minutia descriptors.
//!
//! For every minutia, nine sampling points are taken: the minutia itself plus
//! eight points on a ring, with the minutia direction as the reference
//! direction. At each point the moduli of complex Gabor responses for a bank
//! of frequencies and orientations (5 x 8 by default, 360 values total) are
//! computed from the enhanced image. A trained linear transform projects the
//! 360-D feature to the 25-D minutia descriptor.
//!
//! Coordinates follow the crate convention (see [`crate::geom`]): y grows
//! downward and angles rotate from +x toward +y. Orientations are sampled
//! relative to the minutia direction, which makes the feature components
//! comparable across impressions of the same minutia regardless of finger
//! rotation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::normalize_angle;
use crate::imaging::{enhance, EnhanceParams, EnhancedImage, GrayImage};
use crate::mat::Mat;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Number of sampling points per minutia: the center plus an 8-point ring.
pub const SAMPLING_POINTS: usize = 9;

/// Ring positions around the center point.
pub const RING_POINTS: usize = 8;

/// Minutia type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinutiaKind {
    RidgeEnding,
    Bifurcation,
    Unknown,
}

/// One fingerprint feature point: position, direction and type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minutia {
    /// Column position in pixels (real-valued).
    pub x: f64,
    /// Row position in pixels (real-valued, grows downward).
    pub y: f64,
    /// Direction in radians, normalized to `[0, 2pi)`.
    pub theta: f64,
    pub kind: MinutiaKind,
}

impl Minutia {
    pub fn new(x: f64, y: f64, theta: f64, kind: MinutiaKind) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "minutia fields must be finite, got ({x}, {y}, {theta})"
            )));
        }
        Ok(Minutia {
            x,
            y,
            theta: normalize_angle(theta),
            kind,
        })
    }
}

/// Gabor filter bank configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborBankParams {
    /// Carrier frequencies in cycles per pixel.
    pub frequencies: Vec<f64>,
    /// Orientations per frequency, spaced `pi / orientations` apart starting
    /// at the minutia direction.
    pub orientations: usize,
    /// Gaussian envelope sigma as `sigma_factor / frequency`.
    pub sigma_factor: f64,
    /// Radius of the sampling ring in pixels.
    pub ring_radius: f64,
}

impl Default for GaborBankParams {
    fn default() -> Self {
        GaborBankParams {
            frequencies: vec![1.0 / 6.0, 1.0 / 8.0, 1.0 / 10.0, 1.0 / 12.0, 1.0 / 14.0],
            orientations: 8,
            sigma_factor: 0.56,
            ring_radius: 25.0,
        }
    }
}

impl GaborBankParams {
    /// Number of feature values produced per minutia.
    pub fn feature_len(&self) -> usize {
        SAMPLING_POINTS * self.frequencies.len() * self.orientations
    }

    /// Largest kernel radius in the bank.
    pub fn max_kernel_radius(&self) -> usize {
        self.frequencies
            .iter()
            .map(|&f| kernel_radius(self.sigma_factor / f))
            .max()
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty()
            || self
                .frequencies
                .iter()
                .any(|&f| !f.is_finite() || f <= 0.0 || f >= 0.5)
        {
            return Err(Error::InvalidParameter(
                "frequencies must lie in (0, 0.5) cycles/px".into(),
            ));
        }
        if self.orientations == 0 {
            return Err(Error::InvalidParameter("need >= 1 orientation".into()));
        }
        if !self.sigma_factor.is_finite() || self.sigma_factor <= 0.0 {
            return Err(Error::InvalidParameter("sigma_factor must be > 0".into()));
        }
        if !self.ring_radius.is_finite() || self.ring_radius <= 0.0 {
            return Err(Error::InvalidParameter("ring_radius must be > 0".into()));
        }
        Ok(())
    }
}

fn kernel_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// Moduli of the Gabor responses at the nine sampling points, concatenated
/// point-major: `index = point * (freqs * orients) + freq * orients + orient`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborFeature {
    values: Vec<f64>,
}

impl GaborFeature {
    pub fn from_values(values: Vec<f64>) -> Self {
        GaborFeature { values }
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
}

/// 25-D minutia descriptor (for the default transform).
#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaDescriptor {
    values: Vec<f64>,
}

impl MinutiaDescriptor {
    pub fn from_values(values: Vec<f64>) -> Self {
        MinutiaDescriptor { values }
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
}

/// Where a transform came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Trained,
    Loaded,
}

/// Linear map from the Gabor feature space to descriptor space, with the
/// centering mean persisted alongside (zero for hand-built transforms).
///
/// Projection computes `(v - mean)^T * matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTransform {
    mean: Vec<f64>,
    matrix: Mat,
    pub provenance: Provenance,
    pub version: u32,
}

/// Current transform format version.
pub const TRANSFORM_VERSION: u32 = 1;

impl DescriptorTransform {
    pub fn new(mean: Vec<f64>, matrix: Mat, provenance: Provenance) -> Result<Self> {
        if mean.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: mean.len(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) || matrix.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "transform entries must be finite".into(),
            ));
        }
        Ok(DescriptorTransform {
            mean,
            matrix,
            provenance,
            version: TRANSFORM_VERSION,
        })
    }

    /// Builds a transform with zero mean from row-major matrix data.
    pub fn from_matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        DescriptorTransform::new(vec![0.0; rows], Mat::from_vec(rows, cols, data)?, Provenance::Loaded)
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// The nine sampling positions for a minutia: index 0 is the minutia itself,
/// indices 1..=8 lie on the ring at angles `theta + k * pi/4`, k ascending.
pub fn sampling_points(m: &Minutia, radius: f64) -> [(f64, f64); SAMPLING_POINTS] {
    let mut pts = [(m.x, m.y); SAMPLING_POINTS];
    for k in 0..RING_POINTS {
        let a = m.theta + k as f64 * core::f64::consts::FRAC_PI_4;
        pts[k + 1] = (m.x + radius * a.cos(), m.y + radius * a.sin());
    }
    pts
}

/// Precomputed kernel data for one minutia direction.
///
/// The Gaussian envelope separates into a per-axis profile, and the carrier
/// phase advances by a constant per column, so each kernel is stored as a
/// 1-D envelope, per-row phase seeds and one column step rotation. This cuts
/// the transcendental count from one per tap to one per row.
struct KernelBank {
    /// Per frequency: 1-D envelope of length `2r + 1`.
    envelopes: Vec<Vec<f64>>,
    radii: Vec<usize>,
    /// Per (freq, orient): (cos, sin) of the carrier phase at the row start
    /// `dx = -r`, one seed per row.
    row_seeds: Vec<Vec<(f64, f64)>>,
    /// Per (freq, orient): (cos, sin) of the per-column phase step.
    col_steps: Vec<(f64, f64)>,
    orientations: usize,
}

fn build_kernels(bank: &GaborBankParams, reference: f64) -> KernelBank {
    let orients = bank.orientations;
    let mut envelopes = Vec::with_capacity(bank.frequencies.len());
    let mut radii = Vec::with_capacity(bank.frequencies.len());
    let mut row_seeds = Vec::with_capacity(bank.frequencies.len() * orients);
    let mut col_steps = Vec::with_capacity(bank.frequencies.len() * orients);
    for &f in &bank.frequencies {
        let sigma = bank.sigma_factor / f;
        let r = kernel_radius(sigma) as isize;
        radii.push(r as usize);
        let inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
        envelopes.push(
            (-r..=r)
                .map(|d| (-((d * d) as f64) * inv_two_sigma2).exp())
                .collect(),
        );
        let omega = 2.0 * core::f64::consts::PI * f;
        for l in 0..orients {
            let phi = reference + l as f64 * core::f64::consts::PI / orients as f64;
            let (sp, cp) = phi.sin_cos();
            let (wx, wy) = (omega * cp, omega * sp);
            let seeds: Vec<(f64, f64)> = (-r..=r)
                .map(|dy| {
                    let arg = wx * (-r as f64) + wy * dy as f64;
                    let (s, c) = arg.sin_cos();
                    (c, s)
                })
                .collect();
            row_seeds.push(seeds);
            let (step_s, step_c) = wx.sin_cos();
            col_steps.push((step_c, step_s));
        }
    }
    KernelBank {
        envelopes,
        radii,
        row_seeds,
        col_steps,
        orientations: orients,
    }
}

/// Computes the Gabor feature of one minutia from the enhanced image.
///
/// Fails with [`Error::SamplingOutOfBounds`] if any sampling point's kernel
/// support leaves the image; the error carries the offending point index.
pub fn gabor_feature(
    img: &EnhancedImage,
    m: &Minutia,
    bank: &GaborBankParams,
) -> Result<GaborFeature> {
    bank.validate()?;
    let r_max = bank.max_kernel_radius();
    // +1 so the bilinear sample of the outermost tap stays on the grid.
    let margin = (r_max + 1) as f64;
    let points = sampling_points(m, bank.ring_radius);
    for (i, &(px, py)) in points.iter().enumerate() {
        if px < margin
            || py < margin
            || px > img.width() as f64 - 1.0 - margin
            || py > img.height() as f64 - 1.0 - margin
        {
            return Err(Error::SamplingOutOfBounds { point: i });
        }
    }

    let kernels = build_kernels(bank, m.theta);
    let side = 2 * r_max + 1;
    let mut patch = vec![0.0; side * side];
    let mut values = Vec::with_capacity(bank.feature_len());

    for &(px, py) in &points {
        resample_patch(img, px, py, r_max, side, &mut patch);
        for (j, &r) in kernels.radii.iter().enumerate() {
            let span = 2 * r + 1;
            let start = r_max - r;
            let env = &kernels.envelopes[j];
            for l in 0..kernels.orientations {
                let seeds = &kernels.row_seeds[j * kernels.orientations + l];
                let (step_c, step_s) = kernels.col_steps[j * kernels.orientations + l];
                let mut re = 0.0;
                let mut im = 0.0;
                for row in 0..span {
                    let base = (start + row) * side + start;
                    let (mut c, mut s) = seeds[row];
                    let mut row_re = 0.0;
                    let mut row_im = 0.0;
                    for col in 0..span {
                        let v = env[col] * patch[base + col];
                        row_re += v * c;
                        row_im += v * s;
                        let nc = c * step_c - s * step_s;
                        s = s * step_c + c * step_s;
                        c = nc;
                    }
                    re += env[row] * row_re;
                    im += env[row] * row_im;
                }
                values.push((re * re + im * im).sqrt());
            }
        }
    }
    Ok(GaborFeature { values })
}

/// Bilinear resample of the `(2 r_max + 1)^2` neighborhood of `(px, py)`.
/// The fractional offsets are constant across the patch, so the four
/// interpolation weights are hoisted out of the loop. Bounds are guaranteed
/// by the caller's margin check.
fn resample_patch(
    img: &EnhancedImage,
    px: f64,
    py: f64,
    r_max: usize,
    side: usize,
    patch: &mut [f64],
) {
    let x0 = px.floor();
    let y0 = py.floor();
    let fx = px - x0;
    let fy = py - y0;
    let xi = x0 as usize;
    let yi = y0 as usize;
    let w00 = (1.0 - fx) * (1.0 - fy);
    let w10 = fx * (1.0 - fy);
    let w01 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    let stride = img.width();
    let values = img.values();
    for row in 0..side {
        let sy = yi + row - r_max;
        let base0 = sy * stride + (xi - r_max);
        let base1 = base0 + stride;
        let out = &mut patch[row * side..(row + 1) * side];
        for (col, o) in out.iter_mut().enumerate() {
            *o = values[base0 + col] * w00
                + values[base0 + col + 1] * w10
                + values[base1 + col] * w01
                + values[base1 + col + 1] * w11;
        }
    }
}

/// Projects a Gabor feature through the transform: `(v - mean)^T * matrix`.
pub fn project(feat: &GaborFeature, t: &DescriptorTransform) -> Result<MinutiaDescriptor> {
    if feat.len() != t.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: t.input_dim(),
            got: feat.len(),
        });
    }
    let centered: Vec<f64> = feat
        .values
        .iter()
        .zip(&t.mean)
        .map(|(v, m)| v - m)
        .collect();
    let values = t.matrix.vecmul_left(&centered)?;
    Ok(MinutiaDescriptor { values })
}

/// A minutia skipped by the border check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Skipped {
    /// Index into the input minutiae list.
    pub index: usize,
    /// Offending sampling-point index.
    pub point: usize,
}

/// Result of [`describe_all`]: surviving minutiae (in the enhanced-image
/// frame, input order preserved) with their descriptors, plus the skip list.
#[derive(Debug, Clone, PartialEq)]
pub struct Described {
    pub minutiae: Vec<Minutia>,
    pub descriptors: Vec<MinutiaDescriptor>,
    pub skipped: Vec<Skipped>,
}

/// Parameters for the full per-image descriptor pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorParams {
    pub enhance: EnhanceParams,
    pub bank: GaborBankParams,
}

/// Raw Gabor features for every minutia of an image, without projection.
///
/// `minutiae` holds the surviving minutiae in the enhanced-image frame,
/// `kept` their indices into the input list.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub minutiae: Vec<Minutia>,
    pub features: Vec<GaborFeature>,
    pub kept: Vec<usize>,
    pub skipped: Vec<Skipped>,
}

/// Enhancement plus Gabor feature extraction for every minutia.
///
/// Minutiae are rescaled together with the image when the input resolution
/// differs from the enhancement target. Minutiae whose sampling support
/// leaves the image are skipped and reported; at least one must survive.
pub fn extract_features(
    img: &GrayImage,
    minutiae: &[Minutia],
    params: &DescriptorParams,
) -> Result<Extracted> {
    let enhanced = enhance(img, &params.enhance)?;
    let rx = enhanced.width() as f64 / img.width() as f64;
    let ry = enhanced.height() as f64 / img.height() as f64;

    let mut out = Extracted {
        minutiae: Vec::new(),
        features: Vec::new(),
        kept: Vec::new(),
        skipped: Vec::new(),
    };
    for (index, m) in minutiae.iter().enumerate() {
        let scaled = if (rx - 1.0).abs() < 1e-12 && (ry - 1.0).abs() < 1e-12 {
            *m
        } else {
            // Same pixel-center mapping as the image rescale.
            Minutia {
                x: (m.x + 0.5) * rx - 0.5,
                y: (m.y + 0.5) * ry - 0.5,
                theta: m.theta,
                kind: m.kind,
            }
        };
        match gabor_feature(&enhanced, &scaled, &params.bank) {
            Ok(feat) => {
                out.features.push(feat);
                out.minutiae.push(scaled);
                out.kept.push(index);
            }
            Err(Error::SamplingOutOfBounds { point }) => {
                out.skipped.push(Skipped { index, point });
            }
            Err(e) => return Err(e),
        }
    }
    if out.features.is_empty() {
        return Err(Error::EmptyTemplate);
    }
    Ok(out)
}

/// [`extract_features`] followed by projection: one descriptor per surviving
/// minutia, input order preserved.
pub fn describe_all(
    img: &GrayImage,
    minutiae: &[Minutia],
    t: &DescriptorTransform,
    params: &DescriptorParams,
) -> Result<Described> {
    let extracted = extract_features(img, minutiae, params)?;
    let descriptors = extracted
        .features
        .iter()
        .map(|feat| project(feat, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Described {
        minutiae: extracted.minutiae,
        descriptors,
        skipped: extracted.skipped,
    })
}
