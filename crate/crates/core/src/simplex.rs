//! The simplex code: `q` unit vectors in `R^{q-1}` with pairwise inner
//! product `-1/(q-1)` that sum to zero.
//!
//! Vector `j` is the centered, rescaled basis vector
//! `sqrt(q/(q-1)) * (e_j - 1/q)` of `R^q`, expressed in a fixed Helmert basis
//! of the hyperplane orthogonal to the all-ones vector. With this basis the
//! coordinates have the closed form
//!
//! ```text
//! a_j[k-1] = sqrt(q/(q-1)) * h_k[j],   k = 1..q-1
//! h_k[j]   = -1/sqrt(k(k+1))  if j < k
//!             k/sqrt(k(k+1))  if j == k
//!             0               otherwise
//! ```
//!
//! For `q = 2` this gives `a_0 = -1` and `a_1 = +1`, so a binary measurement
//! `y` satisfies `2y - 1 = sign(w·x)`.

use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCode {
    q: usize,
    // q rows of length q - 1, row-major
    vectors: Vec<f64>,
}

impl SimplexCode {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "simplex code needs q >= 2, got {q}"
            )));
        }
        let dim = q - 1;
        let scale = (q as f64 / dim as f64).sqrt();
        let mut vectors = vec![0.0; q * dim];
        for k in 1..q {
            let kf = k as f64;
            let inv = 1.0 / (kf * (kf + 1.0)).sqrt();
            for j in 0..k {
                vectors[j * dim + (k - 1)] = -scale * inv;
            }
            vectors[k * dim + (k - 1)] = scale * kf * inv;
        }
        Ok(Self { q, vectors })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Length of each code vector, `q - 1`.
    pub fn dim(&self) -> usize {
        self.q - 1
    }

    pub fn vector(&self, j: usize) -> Result<&[f64]> {
        if j >= self.q {
            return Err(Error::InvalidSymbol {
                symbol: j,
                q: self.q,
            });
        }
        Ok(self.row(j))
    }

    pub(crate) fn row(&self, j: usize) -> &[f64] {
        let dim = self.dim();
        &self.vectors[j * dim..(j + 1) * dim]
    }

    /// Scores `<a_j, v>` for every symbol `j`, written into `out`.
    pub(crate) fn scores_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.q);
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(j), v);
        }
    }

    /// `q x q` matrix of pairwise inner products, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let q = self.q;
        let mut g = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                g[i * q + j] = dot(self.row(i), self.row(j));
            }
        }
        g
    }
}

pub fn build_simplex_code(q: usize) -> Result<SimplexCode> {
    SimplexCode::new(q)
}

pub fn code_vector(code: &SimplexCode, j: usize) -> Result<&[f64]> {
    code.vector(j)
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = scores[0];
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s > best_val {
            best = j;
            best_val = s;
        }
    }
    best
}
