//! Grayscale image container and two-stage enhancement: difference of
//! Gaussians band-pass filtering followed by local mean/variance
//! normalization.
//!
//! All filtering uses reflect-at-border padding and separable Gaussian
//! passes with kernel radius `ceil(3 * sigma)`. Inputs whose resolution
//! differs from the target (500 dpi by default) are rescaled by bilinear
//! interpolation before enhancement.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Minimum side length for images entering the descriptor pipeline.
pub const MIN_PIPELINE_SIDE: usize = 64;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    resolution_dpi: u32,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, resolution_dpi: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions {width}x{height} must be nonzero"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        if resolution_dpi == 0 {
            return Err(Error::InvalidParameter("resolution must be nonzero".into()));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
            resolution_dpi,
        })
    }

    /// Constant-valued image, handy in tests and as a canvas.
    pub fn filled(width: usize, height: usize, value: u8, resolution_dpi: u32) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height], resolution_dpi)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn resolution_dpi(&self) -> u32 {
        self.resolution_dpi
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Real-valued copy of the pixel data.
    pub fn to_real(&self) -> EnhancedImage {
        EnhancedImage {
            width: self.width,
            height: self.height,
            values: self.pixels.iter().map(|&p| p as f64).collect(),
        }
    }

    /// Rescales to `target_dpi` with bilinear interpolation. Returns a clone
    /// when the resolution already matches.
    pub fn rescale_to_dpi(&self, target_dpi: u32) -> Result<GrayImage> {
        if target_dpi == 0 {
            return Err(Error::InvalidParameter("target dpi must be nonzero".into()));
        }
        if target_dpi == self.resolution_dpi {
            return Ok(self.clone());
        }
        let scale = target_dpi as f64 / self.resolution_dpi as f64;
        let nw = ((self.width as f64 * scale).round() as usize).max(1);
        let nh = ((self.height as f64 * scale).round() as usize).max(1);
        let sx = self.width as f64 / nw as f64;
        let sy = self.height as f64 / nh as f64;
        let mut pixels = vec![0u8; nw * nh];
        for y in 0..nh {
            // Pixel-center alignment between the two grids.
            let src_y = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            for x in 0..nw {
                let src_x = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let v = bilinear_u8(self, src_x, src_y);
                pixels[y * nw + x] = (v + 0.5).clamp(0.0, 255.0) as u8;
            }
        }
        GrayImage::new(nw, nh, pixels, target_dpi)
    }
}

/// Real-valued image produced by enhancement stages; zero-centered, signed.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl EnhancedImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "image values must be finite".into(),
            ));
        }
        Ok(EnhancedImage {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Bilinear sample at a real-valued position. The four surrounding grid
    /// points must be inside the image.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let xi = x0 as usize;
        let yi = y0 as usize;
        let x1 = if fx > 0.0 { xi + 1 } else { xi };
        let y1 = if fy > 0.0 { yi + 1 } else { yi };
        let v00 = self.get(xi, yi);
        let v10 = self.get(x1, yi);
        let v01 = self.get(xi, y1);
        let v11 = self.get(x1, y1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }
}

fn bilinear_u8(img: &GrayImage, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let xi = x0 as usize;
    let yi = y0 as usize;
    let x1 = (xi + 1).min(img.width - 1);
    let y1 = (yi + 1).min(img.height - 1);
    let v00 = img.get(xi, yi) as f64;
    let v10 = img.get(x1, yi) as f64;
    let v01 = img.get(xi, y1) as f64;
    let v11 = img.get(x1, y1) as f64;
    v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy
}

/// Parameters for [`enhance`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceParams {
    /// Narrow Gaussian sigma of the band-pass, pixels at `target_dpi`.
    pub sigma_narrow: f64,
    /// Wide Gaussian sigma of the band-pass, pixels at `target_dpi`.
    pub sigma_wide: f64,
    /// Side of the square normalization window, odd, >= 3.
    pub window: usize,
    /// Standard-deviation floor for the normalization divide.
    pub eps: f64,
    /// Resolution every image is brought to before filtering.
    pub target_dpi: u32,
}

impl Default for EnhanceParams {
    fn default() -> Self {
        EnhanceParams {
            sigma_narrow: 1.0,
            sigma_wide: 4.0,
            window: 15,
            eps: 1e-6,
            target_dpi: 500,
        }
    }
}

/// Reflect (symmetric) index mapping with period `2n`:
/// `... c b a | a b c ... | c b a ...`.
#[inline]
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let p = 2 * n;
    let mut m = i % p;
    if m < 0 {
        m += p;
    }
    (if m < n { m } else { p - 1 - m }) as usize
}

/// Normalized 1-D Gaussian kernel with radius `ceil(3 sigma)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable Gaussian convolution with reflect padding.
fn gaussian_blur(values: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;

    // Horizontal pass.
    let mut tmp = vec![0.0; values.len()];
    for y in 0..height {
        let row = &values[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (j, &kv) in kernel.iter().enumerate() {
                let xi = reflect_index(x as isize + j as isize - radius, width);
                acc += kv * row[xi];
            }
            tmp[y * width + x] = acc;
        }
    }
    // Vertical pass, accumulated row by row for sequential access.
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        let out_row = &mut out[y * width..(y + 1) * width];
        for (j, &kv) in kernel.iter().enumerate() {
            let yi = reflect_index(y as isize + j as isize - radius, height);
            let src = &tmp[yi * width..(yi + 1) * width];
            for (o, &v) in out_row.iter_mut().zip(src) {
                *o += kv * v;
            }
        }
    }
    out
}

fn check_sigmas(sigma_narrow: f64, sigma_wide: f64) -> Result<()> {
    if !(sigma_narrow.is_finite() && sigma_wide.is_finite())
        || sigma_narrow <= 0.0
        || sigma_wide <= sigma_narrow
    {
        return Err(Error::InvalidParameter(format!(
            "require 0 < sigma_narrow < sigma_wide, got ({sigma_narrow}, {sigma_wide})"
        )));
    }
    Ok(())
}

/// Difference-of-Gaussians band-pass filter of an 8-bit image.
pub fn dog_filter(img: &GrayImage, sigma_narrow: f64, sigma_wide: f64) -> Result<EnhancedImage> {
    dog_filter_real(&img.to_real(), sigma_narrow, sigma_wide)
}

/// Difference-of-Gaussians on a real-valued image; the linear-space variant
/// of [`dog_filter`].
pub fn dog_filter_real(
    img: &EnhancedImage,
    sigma_narrow: f64,
    sigma_wide: f64,
) -> Result<EnhancedImage> {
    check_sigmas(sigma_narrow, sigma_wide)?;
    let narrow = gaussian_blur(&img.values, img.width, img.height, sigma_narrow);
    let wide = gaussian_blur(&img.values, img.width, img.height, sigma_wide);
    let values = narrow.iter().zip(&wide).map(|(n, w)| n - w).collect();
    EnhancedImage::new(img.width, img.height, values)
}

/// Local mean/variance normalization over a `window x window` neighborhood
/// with reflect padding.
///
/// When the window spans an axis entirely (`window >= width` or `>= height`)
/// the statistics along that axis cover each pixel exactly once, so a window
/// at least as large as the image normalizes by global statistics.
pub fn local_normalize(img: &EnhancedImage, window: usize, eps: f64) -> Result<EnhancedImage> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }

    let (w, h) = (img.width, img.height);
    let squares: Vec<f64> = img.values.iter().map(|v| v * v).collect();
    let sums = window_sums(&img.values, w, h, window);
    let sq_sums = window_sums(&squares, w, h, window);
    let count = (window.min(w) * window.min(h)) as f64;

    let mut out = vec![0.0; w * h];
    for i in 0..w * h {
        let mean = sums[i] / count;
        let var = (sq_sums[i] / count - mean * mean).max(0.0);
        let std = var.sqrt();
        out[i] = (img.values[i] - mean) / std.max(eps);
    }
    EnhancedImage::new(w, h, out)
}

/// Separable windowed sums with reflect padding; an axis spanned entirely by
/// the window contributes each element exactly once.
fn window_sums(values: &[f64], width: usize, height: usize, window: usize) -> Vec<f64> {
    let half = (window / 2) as isize;

    let mut tmp = vec![0.0; values.len()];
    for y in 0..height {
        let row = &values[y * width..(y + 1) * width];
        if window >= width {
            let total: f64 = row.iter().sum();
            for x in 0..width {
                tmp[y * width + x] = total;
            }
        } else {
            for x in 0..width {
                let mut acc = 0.0;
                for dx in -half..=half {
                    acc += row[reflect_index(x as isize + dx, width)];
                }
                tmp[y * width + x] = acc;
            }
        }
    }

    let mut out = vec![0.0; values.len()];
    if window >= height {
        let mut totals = vec![0.0; width];
        for y in 0..height {
            for (t, &v) in totals.iter_mut().zip(&tmp[y * width..(y + 1) * width]) {
                *t += v;
            }
        }
        for y in 0..height {
            out[y * width..(y + 1) * width].copy_from_slice(&totals);
        }
    } else {
        for y in 0..height {
            let out_row = &mut out[y * width..(y + 1) * width];
            for dy in -half..=half {
                let yi = reflect_index(y as isize + dy, height);
                let src = &tmp[yi * width..(yi + 1) * width];
                for (o, &v) in out_row.iter_mut().zip(src) {
                    *o += v;
                }
            }
        }
    }
    out
}

/// Full enhancement: rescale to `params.target_dpi`, band-pass, normalize.
pub fn enhance(img: &GrayImage, params: &EnhanceParams) -> Result<EnhancedImage> {
    let scaled = img.rescale_to_dpi(params.target_dpi)?;
    if scaled.width() < MIN_PIPELINE_SIDE || scaled.height() < MIN_PIPELINE_SIDE {
        return Err(Error::ImageTooSmall {
            width: scaled.width(),
            height: scaled.height(),
            min: MIN_PIPELINE_SIDE,
        });
    }
    let banded = dog_filter(&scaled, params.sigma_narrow, params.sigma_wide)?;
    local_normalize(&banded, params.window, params.eps)
}
