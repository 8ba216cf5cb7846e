//! Angle and rigid-motion arithmetic in image coordinates.
//!
//! One convention, used everywhere: the x axis points right, the y axis
//! points *down* (row order), and increasing angle rotates from +x toward +y.
//! Directions are kept in `[0, 2pi)`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Full turn.
pub const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Normalizes an angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta - (theta / TWO_PI).floor() * TWO_PI;
    // Rounding can land exactly on 2pi for tiny negative inputs.
    if t >= TWO_PI {
        0.0
    } else {
        t
    }
}

/// Minimal absolute difference between two directions, in `[0, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > core::f64::consts::PI {
        TWO_PI - d
    } else {
        d
    }
}

/// Weighted circular mean of `(angle, weight)` pairs, in `[0, 2pi)`.
///
/// Returns `None` when the weighted resultant vanishes (e.g. two equal
/// weights on opposite directions), which has no meaningful mean.
pub fn weighted_circular_mean(pairs: &[(f64, f64)]) -> Option<f64> {
    let mut x = 0.0;
    let mut y = 0.0;
    for &(a, w) in pairs {
        x += w * a.cos();
        y += w * a.sin();
    }
    if (x * x + y * y).sqrt() < 1e-12 {
        None
    } else {
        Some(normalize_angle(y.atan2(x)))
    }
}

/// Rotates `(x, y)` by `angle` in the image frame (y down).
pub fn rotate(x: f64, y: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (x * c - y * s, x * s + y * c)
}

/// A rigid motion `p -> R(rotation) * p + t` in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    /// Rotation in radians (image frame, +x toward +y).
    pub rotation: f64,
    /// Translation in pixels, applied after the rotation.
    pub translation: (f64, f64),
}

impl RigidMotion {
    /// The identity motion.
    pub fn identity() -> Self {
        RigidMotion {
            rotation: 0.0,
            translation: (0.0, 0.0),
        }
    }

    /// Applies the motion to a point.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let (rx, ry) = rotate(x, y, self.rotation);
        (rx + self.translation.0, ry + self.translation.1)
    }

    /// The inverse motion.
    pub fn inverse(&self) -> Self {
        let (tx, ty) = rotate(-self.translation.0, -self.translation.1, -self.rotation);
        RigidMotion {
            rotation: -self.rotation,
            translation: (tx, ty),
        }
    }
}

/// Collects the angles of `n` equally spaced directions starting at `start`.
pub fn ring_angles(start: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| start + k as f64 * TWO_PI / n as f64)
        .collect()
}
