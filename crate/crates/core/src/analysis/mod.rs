//! Monte Carlo estimates of the constants that govern recovery error, bound
//! curves, and error metrics.

pub mod stats;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm1, norm2, squared_distance};
use crate::recovery::soft_threshold;
use crate::rng::{keyed_rng, Domain};
use crate::simplex::{argmax, SimplexCode};
use stats::Moments;

/// Samples per seeded sub-stream. The reported mean only depends on this
/// partition, never on how chunks are scheduled across threads.
const MC_CHUNK: usize = 8192;

/// SNR reported for an exact reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub q: usize,
    pub sigma: f64,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthEstimate {
    pub d: usize,
    pub s: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Runs `sample` over `n` draws split into fixed chunks, each with its own
/// keyed stream, and merges chunk moments in chunk order.
fn chunked_moments<F>(n: usize, sample: F) -> Moments
where
    F: Fn(usize, usize) -> Moments + Sync,
{
    let chunks = n.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            sample(c, len)
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Estimates `lambda(q, sigma) = E <a_gamma, g>` where `g ~ N(0, I_{q-1})`
/// and `gamma = argmax_j <a_j, g + sigma g'>` for an independent standard
/// normal `g'`. With `sigma = 0` this is the expected largest projection of a
/// Gaussian vector onto the simplex code.
pub fn estimate_lambda(q: usize, sigma: f64, n_samples: usize, seed: u64) -> Result<LambdaEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let code = SimplexCode::new(q)?;
    let dim = q - 1;
    let moments = chunked_moments(n_samples, |chunk, len| {
        let mut rng = keyed_rng(seed, Domain::Lambda, chunk as u64, q as u64);
        let mut g = vec![0.0; dim];
        let mut noisy = vec![0.0; dim];
        let mut scores = vec![0.0; q];
        let mut acc = Moments::default();
        for _ in 0..len {
            for v in g.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            // g' is always drawn so that runs at different sigma share g
            for (nv, gv) in noisy.iter_mut().zip(&g) {
                let gp: f64 = rng.sample(StandardNormal);
                *nv = gv + sigma * gp;
            }
            code.scores_into(&noisy, &mut scores);
            let gamma = argmax(&scores);
            acc.push(dot(code.row(gamma), &g));
        }
        acc
    });
    Ok(LambdaEstimate {
        q,
        sigma,
        value: moments.mean(),
        stderr: moments.stderr(),
        n_samples,
    })
}

/// `lambda` under the inexact-maximum channel: the argmax symbol is kept with
/// probability `p`, otherwise replaced by a uniform symbol. The returned
/// estimate has `sigma = 0`.
pub fn estimate_lambda_flip(q: usize, p: f64, n_samples: usize, seed: u64) -> Result<LambdaEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "retention probability must lie in (1/2, 1], got {p}"
        )));
    }
    let code = SimplexCode::new(q)?;
    let dim = q - 1;
    let moments = chunked_moments(n_samples, |chunk, len| {
        let mut rng = keyed_rng(seed, Domain::Lambda, chunk as u64, q as u64);
        let mut g = vec![0.0; dim];
        let mut scores = vec![0.0; q];
        let mut acc = Moments::default();
        for _ in 0..len {
            for v in g.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            code.scores_into(&g, &mut scores);
            let u: f64 = rng.random();
            let gamma = if u < p {
                argmax(&scores)
            } else {
                rng.random_range(0..q)
            };
            acc.push(scores[gamma]);
        }
        acc
    });
    Ok(LambdaEstimate {
        q,
        sigma: 0.0,
        value: moments.mean(),
        stderr: moments.stderr(),
        n_samples,
    })
}

const TAU_TOL: f64 = 1e-10;

/// `max <g, u>` over `K1 = { |u|_1 <= sqrt(s), |u|_2 <= 1 }`.
///
/// The maximizer is `S_tau(g) / |S_tau(g)|` for the smallest `tau >= 0`
/// making it l1-feasible; `tau` is found by bisection, using that the
/// l1/l2 ratio of `S_tau(g)` does not increase with `tau`.
pub fn support_function_k1(g: &[f64], s: usize) -> Result<f64> {
    let d = g.len();
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "sparsity must satisfy 1 <= s <= d = {d}, got {s}"
        )));
    }
    let radius = (s as f64).sqrt();
    let l2 = norm2(g);
    if l2 == 0.0 {
        return Ok(0.0);
    }
    if norm1(g) <= radius * l2 {
        return Ok(l2);
    }

    let top = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ties = g.iter().filter(|v| v.abs() == top).count();
    if ties > s {
        // spreading sqrt(s) of l1 mass over the tied maxima attains the
        // Hölder bound sqrt(s) * |g|_inf
        return Ok(radius * top);
    }
    // below the second-largest magnitude only the maxima survive, which is
    // feasible because ties <= s
    let mut hi = g
        .iter()
        .map(|v| v.abs())
        .filter(|&a| a < top)
        .fold(0.0f64, f64::max);
    let mut lo = 0.0;
    let ratio = |tau: f64| {
        let u = soft_threshold(g, tau);
        norm1(&u) / norm2(&u)
    };
    for _ in 0..400 {
        if hi - lo <= TAU_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ratio(mid) <= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let u = soft_threshold(g, hi);
    Ok(dot(g, &u) / norm2(&u))
}

/// Gaussian mean width of `K1`: `2 E sup_{u in K1} <g, u>`, using that the
/// set is symmetric so `K1 - K1 = 2 K1`.
pub fn estimate_mean_width_k1(d: usize, s: usize, n_samples: usize, seed: u64) -> Result<WidthEstimate> {
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "sparsity must satisfy 1 <= s <= d = {d}, got {s}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let moments = chunked_moments(n_samples, |chunk, len| {
        let mut rng = keyed_rng(seed, Domain::Width, chunk as u64, d as u64);
        let mut g = vec![0.0; d];
        let mut acc = Moments::default();
        for _ in 0..len {
            for v in g.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let h = support_function_k1(&g, s).expect("s validated above");
            acc.push(2.0 * h);
        }
        acc
    });
    Ok(WidthEstimate {
        d,
        s,
        value: moments.mean(),
        stderr: moments.stderr(),
        n_samples,
    })
}

/// `c * (w / sqrt(ln(q) * m) + delta)`
pub fn bound_curve(m: usize, q: usize, width: f64, c: f64, delta: f64) -> f64 {
    c * (width / ((q as f64).ln() * m as f64).sqrt() + delta)
}

/// Squared Euclidean distance `|x - xhat|^2`.
pub fn reconstruction_error(x: &[f64], xhat: &[f64]) -> Result<f64> {
    check_len("reconstruction length", x.len(), xhat.len())?;
    Ok(squared_distance(x, xhat))
}

/// `10 log10(|x|^2 / |x - xhat|^2)` in decibels, capped at [`SNR_CAP_DB`]
/// for an exact match.
pub fn snr_db(x: &[f64], xhat: &[f64]) -> Result<f64> {
    let err = reconstruction_error(x, xhat)?;
    let energy = dot(x, x);
    if energy == 0.0 {
        return Err(Error::Domain("SNR undefined for an all-zero reference".into()));
    }
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (energy / err).log10()).min(SNR_CAP_DB))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_curve_arithmetic() {
        let v = bound_curve(100, 2, 10.0, 1.0, 0.0);
        assert!((v - 10.0 / (100.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        assert!((v - 1.2011).abs() < 1e-4);
        let far = bound_curve(1_000_000_000, 4, 10.0, 2.0, 0.3);
        assert!((far - 0.6).abs() < 1e-3);
        let mut prev = f64::INFINITY;
        for q in 2..=64 {
            let b = bound_curve(50, q, 3.0, 1.5, 0.1);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn error_metric() {
        assert_eq!(reconstruction_error(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(reconstruction_error(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(reconstruction_error(&[0.6, 0.8], &[-0.6, -0.8]).unwrap(), 4.0);
        assert!(reconstruction_error(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn snr() {
        let x = [3.0, 4.0];
        assert!(snr_db(&x, &[0.0, 0.0]).unwrap().abs() < 1e-12);
        // error energy 0.25 = 25/100
        assert!((snr_db(&x, &[3.5, 4.0]).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(snr_db(&x, &x).unwrap(), SNR_CAP_DB);
        assert!(matches!(snr_db(&[0.0, 0.0], &x), Err(Error::Domain(_))));
    }

    #[test]
    fn support_function_simple_cases() {
        assert_eq!(support_function_k1(&[3.0, 0.0, 0.0], 1).unwrap(), 3.0);
        let g = [0.3, -1.2, 0.5, 2.0];
        assert!((support_function_k1(&g, 4).unwrap() - norm2(&g)).abs() < 1e-12);
        assert_eq!(support_function_k1(&[1.0, -1.0, 1.0], 1).unwrap(), 1.0);
        assert_eq!(support_function_k1(&[0.0; 3], 2).unwrap(), 0.0);
        assert!(support_function_k1(&g, 0).is_err());
        assert!(support_function_k1(&g, 5).is_err());
    }

    #[test]
    fn lambda_is_reproducible() {
        let a = estimate_lambda(5, 0.5, 20_000, 3).unwrap();
        let b = estimate_lambda(5, 0.5, 20_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0 && a.stderr > 0.0);
        assert!(estimate_lambda(5, 0.0, 0, 3).is_err());
        assert!(estimate_lambda(1, 0.0, 10, 3).is_err());
    }

    #[test]
    fn flip_lambda_between_bounds() {
        let q = 8;
        let exact = estimate_lambda(q, 0.0, 200_000, 1).unwrap();
        for p in [0.6, 0.8, 1.0] {
            let f = estimate_lambda_flip(q, p, 200_000, 1).unwrap();
            // uniform replacement contributes zero on average
            assert!((f.value - p * exact.value).abs() < 4.0 * (f.stderr + exact.stderr), "p={p}");
            assert!(f.value >= (2.0 * p - 1.0) * exact.value - 3.0 * f.stderr);
        }
        assert!(estimate_lambda_flip(q, 0.5, 10, 1).is_err());
    }

    #[test]
    fn width_sanity() {
        let w = estimate_mean_width_k1(50, 50, 4000, 2).unwrap();
        // 2 E|g| for d = 50 is 2 sqrt(2) Gamma(25.5)/Gamma(25), about 14.07
        assert!((w.value - 14.07).abs() < 3.0 * w.stderr + 0.01, "{w:?}");
        assert!(w.value <= 2.0 * 50f64.sqrt() * (1.0 + 5.0 * w.stderr / w.value));
        assert!(estimate_mean_width_k1(5, 6, 10, 0).is_err());
    }
}
