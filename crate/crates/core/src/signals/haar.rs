//! Orthonormal multi-level 2-D Haar transform.
//!
//! Standard pyramid layout: each level transforms the rows and then the
//! columns of the current top-left approximation block, halving each side
//! that is still longer than one. The coarsest average ends up at index 0.

use std::f64::consts::FRAC_1_SQRT_2;

use super::ImagePlane;
use crate::error::{check_len, Error, Result};

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || !width.is_power_of_two() || !height.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "Haar transform needs power-of-two dimensions, got {width}x{height}"
        )));
    }
    Ok(())
}

/// One analysis step on `n` samples spaced `stride` apart.
fn analyze(data: &mut [f64], start: usize, stride: usize, n: usize, tmp: &mut [f64]) {
    let half = n / 2;
    for k in 0..half {
        let a = data[start + 2 * k * stride];
        let b = data[start + (2 * k + 1) * stride];
        tmp[k] = (a + b) * FRAC_1_SQRT_2;
        tmp[half + k] = (a - b) * FRAC_1_SQRT_2;
    }
    for k in 0..n {
        data[start + k * stride] = tmp[k];
    }
}

fn synthesize(data: &mut [f64], start: usize, stride: usize, n: usize, tmp: &mut [f64]) {
    let half = n / 2;
    for k in 0..half {
        let s = data[start + k * stride];
        let d = data[start + (half + k) * stride];
        tmp[2 * k] = (s + d) * FRAC_1_SQRT_2;
        tmp[2 * k + 1] = (s - d) * FRAC_1_SQRT_2;
    }
    for k in 0..n {
        data[start + k * stride] = tmp[k];
    }
}

/// Block sizes `(w, h)` processed at each level, coarsest last.
fn levels(width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut w, mut h) = (width, height);
    while w > 1 || h > 1 {
        out.push((w, h));
        w = (w / 2).max(1);
        h = (h / 2).max(1);
    }
    out
}

pub fn haar2d_forward(img: &ImagePlane) -> Result<Vec<f64>> {
    let (width, height) = (img.width(), img.height());
    check_dims(width, height)?;
    let mut data = img.pixels().to_vec();
    let mut tmp = vec![0.0; width.max(height)];
    for (w, h) in levels(width, height) {
        if w > 1 {
            for row in 0..h {
                analyze(&mut data, row * width, 1, w, &mut tmp);
            }
        }
        if h > 1 {
            for col in 0..w {
                analyze(&mut data, col, width, h, &mut tmp);
            }
        }
    }
    Ok(data)
}

pub fn haar2d_inverse(coeffs: &[f64], width: usize, height: usize) -> Result<ImagePlane> {
    check_dims(width, height)?;
    check_len("coefficient count", width * height, coeffs.len())?;
    let mut data = coeffs.to_vec();
    let mut tmp = vec![0.0; width.max(height)];
    for (w, h) in levels(width, height).into_iter().rev() {
        if h > 1 {
            for col in 0..w {
                synthesize(&mut data, col, width, h, &mut tmp);
            }
        }
        if w > 1 {
            for row in 0..h {
                synthesize(&mut data, row * width, 1, w, &mut tmp);
            }
        }
    }
    ImagePlane::new(width, height, data)
}
