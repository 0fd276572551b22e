//! Test signals and image-pipeline primitives.

mod haar;
pub mod pgm;

pub use haar::{haar2d_forward, haar2d_inverse};

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::linalg::norm2;
use crate::rng::{keyed_rng, Domain};

/// A unit-norm vector with exactly `s` nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub vector: Vec<f64>,
    pub d: usize,
    pub s: usize,
    pub seed: u64,
}

impl SparseSignal {
    pub fn support(&self) -> Vec<usize> {
        self.vector
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Gauss–Bernoulli signal: uniform random support of size exactly `s`,
/// i.i.d. standard normal values on it, normalized to unit length.
pub fn gauss_bernoulli(d: usize, s: usize, seed: u64) -> Result<SparseSignal> {
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "sparsity must satisfy 1 <= s <= d = {d}, got {s}"
        )));
    }
    let mut rng = keyed_rng(seed, Domain::Signal, d as u64, s as u64);
    let mut support = index::sample(&mut rng, d, s).into_vec();
    support.sort_unstable();
    let mut vector = vec![0.0; d];
    for &i in &support {
        // a zero draw has probability zero but would break the sparsity count
        loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                vector[i] = v;
                break;
            }
        }
    }
    let n = norm2(&vector);
    vector.iter_mut().for_each(|v| *v /= n);
    Ok(SparseSignal { vector, d, s, seed })
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest. Ties at the
/// cutoff keep the lower index.
pub fn threshold_top_k(coeffs: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > coeffs.len() {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            coeffs.len()
        )));
    }
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; coeffs.len()];
    for &i in &order[..k] {
        out[i] = coeffs[i];
    }
    Ok(out)
}

/// Returns `v / |v|` together with `|v|`.
pub fn normalize(v: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = norm2(v);
    if n == 0.0 {
        return Err(Error::Domain("cannot normalize the zero vector".into()));
    }
    Ok((v.iter().map(|x| x / n).collect(), n))
}

/// Grayscale image with intensities stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("image dimensions must be >= 1".into()));
        }
        check_len("pixel count", width * height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn clamped(&self, lo: f64, hi: f64) -> ImagePlane {
        ImagePlane {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| p.clamp(lo, hi)).collect(),
        }
    }
}

/// Deterministic grayscale test scene in `[0, 1]`: a lit gradient background,
/// a dark hull-like ellipse, a bright rectangle and a mast, plus fine
/// texture. Used when no input image is supplied.
pub fn synthetic_scene(width: usize, height: usize) -> Result<ImagePlane> {
    let mut pixels = Vec::with_capacity(width * height);
    let (w, h) = (width as f64, height as f64);
    for j in 0..height {
        for i in 0..width {
            let x = (i as f64 + 0.5) / w;
            let y = (j as f64 + 0.5) / h;
            let mut v = 0.55 + 0.3 * (1.0 - y) - 0.1 * x;
            let (ex, ey) = ((x - 0.5) / 0.38, (y - 0.68) / 0.14);
            if ex * ex + ey * ey <= 1.0 {
                v = 0.18 + 0.1 * x;
            }
            if (0.3..0.55).contains(&x) && (0.42..0.58).contains(&y) {
                v = 0.85;
            }
            if (0.6..0.64).contains(&x) && (0.12..0.6).contains(&y) {
                v = 0.3;
            }
            v += 0.04 * (23.0 * x).sin() * (17.0 * y).cos();
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    ImagePlane::new(width, height, pixels)
}
