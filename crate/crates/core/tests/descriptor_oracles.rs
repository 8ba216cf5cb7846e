//! Independent oracles for the Gabor descriptor stage: a naive complex
//! dot-product kernel evaluation, rotation invariance under an actual image
//! rotation, projection linearity against a direct matrix multiply, and the
//! batching contract of `describe_all`.

use fpindex_core::descriptor::{
    describe_all, gabor_feature, project, sampling_points, DescriptorParams, DescriptorTransform,
    GaborBankParams, GaborFeature, Minutia, MinutiaKind,
};
use fpindex_core::imaging::{EnhancedImage, GrayImage};
use fpindex_core::synthgen::gen_finger;

fn minutia(x: f64, y: f64, theta: f64) -> Minutia {
    Minutia::new(x, y, theta, MinutiaKind::Unknown).unwrap()
}

fn bilinear(vals: &[f64], w: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    vals[y0 * w + x0] * (1.0 - fx) * (1.0 - fy)
        + vals[y0 * w + x1] * fx * (1.0 - fy)
        + vals[y1 * w + x0] * (1.0 - fx) * fy
        + vals[y1 * w + x1] * fx * fy
}

#[test]
fn single_kernel_matches_complex_dot_product_oracle() {
    // One frequency, one orientation: kernel support 11x11 (radius 5).
    let bank = GaborBankParams {
        frequencies: vec![0.35],
        orientations: 1,
        sigma_factor: 0.56,
        ring_radius: 0.5,
    };
    assert_eq!(bank.max_kernel_radius(), 5);

    let (w, h) = (16, 16);
    let mut vals = vec![0.0; w * h];
    let mut state = 7u64;
    for v in vals.iter_mut() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *v = (state >> 40) as f64 / (1u64 << 24) as f64 - 0.5;
    }
    let img = EnhancedImage::new(w, h, vals.clone()).unwrap();
    let m = minutia(7.3, 7.6, 0.9);
    let feat = gabor_feature(&img, &m, &bank).unwrap();
    assert_eq!(feat.len(), 9);

    let sigma: f64 = 0.56 / 0.35;
    let phi = m.theta;
    let omega = 2.0 * std::f64::consts::PI * 0.35;
    for (i, &(px, py)) in sampling_points(&m, 0.5).iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for dy in -5i32..=5 {
            for dx in -5i32..=5 {
                let v = bilinear(&vals, w, px + dx as f64, py + dy as f64);
                let env = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                let arg = omega * (dx as f64 * phi.cos() + dy as f64 * phi.sin());
                re += v * env * arg.cos();
                im += v * env * arg.sin();
            }
        }
        let want = (re * re + im * im).sqrt();
        let got = feat.values()[i];
        assert!(
            (got - want).abs() <= 1e-9,
            "point {i}: {got} vs {want}"
        );
    }
}

#[test]
fn feature_invariant_under_quarter_turn_of_image_and_minutia() {
    // Rotate a ridge patch by 90 degrees about the minutia with bilinear
    // resampling; the feature of (rotated image, rotated minutia) matches the
    // original within 5% relative L2 (grid discretization error).
    let finger = gen_finger(31);
    let base = finger.render().to_real();
    let n = base.width();
    let c = 160.0;
    let m = minutia(c, c, 0.4);

    let rot = std::f64::consts::FRAC_PI_2;
    let mut rotated = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            // Source position: rotate back around the minutia.
            let dx = x as f64 - c;
            let dy = y as f64 - c;
            let sx = c + dx * rot.cos() + dy * rot.sin();
            let sy = c - dx * rot.sin() + dy * rot.cos();
            if sx >= 0.0 && sy >= 0.0 && sx <= (n - 1) as f64 && sy <= (n - 1) as f64 {
                rotated[y * n + x] = bilinear(base.values(), n, sx, sy);
            }
        }
    }
    let rotated = EnhancedImage::new(n, n, rotated).unwrap();
    let m_rot = minutia(c, c, 0.4 + rot);

    let bank = GaborBankParams::default();
    let f0 = gabor_feature(&base, &m, &bank).unwrap();
    let f1 = gabor_feature(&rotated, &m_rot, &bank).unwrap();

    let diff: f64 = f0
        .values()
        .iter()
        .zip(f1.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = f0.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm > 0.0);
    assert!(
        diff / norm <= 0.05,
        "relative L2 deviation {}",
        diff / norm
    );
}

#[test]
fn project_linear_within_tolerance_and_matches_matmul_oracle() {
    let mut state = 13u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 40) as f64 / (1u64 << 24) as f64 - 0.5
    };
    let matrix: Vec<f64> = (0..360 * 25).map(|_| next()).collect();
    let t = DescriptorTransform::from_matrix(360, 25, matrix.clone()).unwrap();

    for _ in 0..20 {
        let f1: Vec<f64> = (0..360).map(|_| next()).collect();
        let f2: Vec<f64> = (0..360).map(|_| next()).collect();
        let (a, b) = (next() * 3.0, next() * 3.0);
        let combo: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| a * x + b * y).collect();

        let p1 = project(&GaborFeature::from_values(f1.clone()), &t).unwrap();
        let p2 = project(&GaborFeature::from_values(f2.clone()), &t).unwrap();
        let pc = project(&GaborFeature::from_values(combo.clone()), &t).unwrap();

        // Direct row-vector times matrix oracle.
        for j in 0..25 {
            let want: f64 = (0..360).map(|i| combo[i] * matrix[i * 25 + j]).sum();
            let lin = a * p1.values()[j] + b * p2.values()[j];
            let got = pc.values()[j];
            let scale = want.abs().max(1.0);
            assert!((got - want).abs() <= 1e-9 * scale, "{got} vs oracle {want}");
            assert!((got - lin).abs() <= 1e-9 * scale, "{got} vs linearity {lin}");
        }
    }
}

#[test]
fn describe_all_batching_contract() {
    let finger = gen_finger(17);
    let image = finger.render();
    let t = DescriptorTransform::from_matrix(360, 25, {
        let mut m = vec![0.0; 360 * 25];
        for i in 0..25 {
            m[i * 25 + i] = 1.0;
        }
        m
    })
    .unwrap();
    let params = DescriptorParams::default();

    // All minutiae at the center: nothing skipped.
    let center_minutiae: Vec<Minutia> = (0..5)
        .map(|i| minutia(160.0 + i as f64, 160.0, 0.3 * i as f64))
        .collect();
    let out = describe_all(&image, &center_minutiae, &t, &params).unwrap();
    assert_eq!(out.descriptors.len(), 5);
    assert!(out.skipped.is_empty());

    // A corner minutia is skipped and reported; totals add up.
    let mut with_corner = center_minutiae.clone();
    with_corner.insert(2, minutia(0.0, 0.0, 0.0));
    let out = describe_all(&image, &with_corner, &t, &params).unwrap();
    assert_eq!(out.descriptors.len() + out.skipped.len(), with_corner.len());
    assert_eq!(out.skipped.len(), 1);
    assert_eq!(out.skipped[0].index, 2);

    // Duplicate minutiae produce identical descriptors.
    let dup = vec![minutia(150.0, 150.0, 1.0); 2];
    let out = describe_all(&image, &dup, &t, &params).unwrap();
    assert_eq!(out.descriptors[0], out.descriptors[1]);

    // No survivors is an error.
    let corners = vec![minutia(0.0, 0.0, 0.0), minutia(319.0, 319.0, 0.0)];
    assert!(describe_all(&image, &corners, &t, &params).is_err());
}

#[test]
fn describe_all_scales_minutiae_with_resolution() {
    // The same physical scene at 250 dpi with halved coordinates must give
    // descriptors close to the 500 dpi original.
    let finger = gen_finger(23);
    let image500 = finger.render();
    let n = image500.width();
    // Downsample by 2 (box average) to mimic a 250 dpi scan.
    let mut pixels = Vec::with_capacity(n / 2 * n / 2);
    for y in 0..n / 2 {
        for x in 0..n / 2 {
            let s = image500.get(2 * x, 2 * y) as u32
                + image500.get(2 * x + 1, 2 * y) as u32
                + image500.get(2 * x, 2 * y + 1) as u32
                + image500.get(2 * x + 1, 2 * y + 1) as u32;
            pixels.push((s / 4) as u8);
        }
    }
    let image250 = GrayImage::new(n / 2, n / 2, pixels, 250).unwrap();

    let t = DescriptorTransform::from_matrix(360, 25, {
        let mut m = vec![0.0; 360 * 25];
        for i in 0..25 {
            m[i * 25 + i] = 1.0;
        }
        m
    })
    .unwrap();
    let params = DescriptorParams::default();

    let m500 = vec![minutia(160.0, 160.0, 0.7)];
    let m250 = vec![minutia(79.75, 79.75, 0.7)]; // same pixel-center point
    let d500 = describe_all(&image500, &m500, &t, &params).unwrap();
    let d250 = describe_all(&image250, &m250, &t, &params).unwrap();

    let a = d500.descriptors[0].values();
    let b = d250.descriptors[0].values();
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(
        diff / norm < 0.2,
        "rescaled descriptor deviates {}",
        diff / norm
    );
    // And the rescaled minutia survived in the 500 dpi frame.
    assert!((d250.minutiae[0].x - 160.0).abs() < 1.0);
}
