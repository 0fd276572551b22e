//! Gaussian sensing ensembles and q-ary quantized measurements.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::rng::{keyed_rng, Domain};
use crate::simplex::{argmax, SimplexCode};

/// Signals must lie in the unit ball, up to this slack.
pub const BALL_SLACK: f64 = 1e-9;

/// A logical collection of `m` independent `(q-1) x d` standard Gaussian
/// matrices. Nothing is stored: matrix `i` is regenerated from
/// `(master_seed, i, q, d)` whenever it is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensingEnsemble {
    master_seed: u64,
    m: usize,
    q: usize,
    d: usize,
}

impl SensingEnsemble {
    pub fn new(master_seed: u64, m: usize, q: usize, d: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if q < 2 {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        if q > u32::MAX as usize || d > u32::MAX as usize {
            return Err(Error::InvalidParameter("q and d must fit in 32 bits".into()));
        }
        Ok(Self {
            master_seed,
            m,
            q,
            d,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn d(&self) -> usize {
        self.d
    }

    /// Regenerates `W_i`.
    pub fn matrix(&self, i: usize) -> Result<Matrix> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.m,
            });
        }
        let shape_key = ((self.q as u64) << 32) | self.d as u64;
        let mut rng = keyed_rng(self.master_seed, Domain::Matrix, i as u64, shape_key);
        let data: Vec<f64> = (0..(self.q - 1) * self.d)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Matrix::from_vec(self.q - 1, self.d, data)
    }

    pub(crate) fn check_code(&self, code: &SimplexCode) -> Result<()> {
        check_len("simplex code alphabet", self.q, code.q())
    }
}

pub fn materialize_matrix(ensemble: &SensingEnsemble, i: usize) -> Result<Matrix> {
    ensemble.matrix(i)
}

/// Noise applied at sensing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Noiseless,
    /// Adds i.i.d. `N(0, sigma^2)` to each of the `q` scores before the argmax.
    PreQuantGaussian { sigma: f64, seed: u64 },
    /// Keeps the true symbol with probability `p`, otherwise replaces it by a
    /// uniform draw from the whole alphabet (which may hit the true symbol).
    SymbolFlip { p: f64, seed: u64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Noiseless => Ok(()),
            NoiseSpec::PreQuantGaussian { sigma, .. } => {
                if sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "noise sigma must be finite and >= 0, got {sigma}"
                    )))
                }
            }
            NoiseSpec::SymbolFlip { p, .. } => {
                if p > 0.5 && p <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "retention probability must lie in (1/2, 1], got {p}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Noiseless => write!(f, "none"),
            NoiseSpec::PreQuantGaussian { sigma, seed } => write!(f, "gaussian:{sigma}:{seed}"),
            NoiseSpec::SymbolFlip { p, seed } => write!(f, "flip:{p}:{seed}"),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("unrecognized noise spec `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["none"] => NoiseSpec::Noiseless,
            ["gaussian", sigma, seed] => NoiseSpec::PreQuantGaussian {
                sigma: sigma.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            ["flip", p, seed] => NoiseSpec::SymbolFlip {
                p: p.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The `m` symbols produced by sensing one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    symbols: Vec<usize>,
    q: usize,
    noise: NoiseSpec,
}

impl MeasurementVector {
    pub fn new(symbols: Vec<usize>, q: usize, noise: NoiseSpec) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
        }
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("measurement vector is empty".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&y| y >= q) {
            return Err(Error::InvalidSymbol { symbol: bad, q });
        }
        Ok(Self { symbols, q, noise })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn m(&self) -> usize {
        self.symbols.len()
    }
    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }
}

/// Text form: a header line `q=<q> m=<m> noise=<spec>` followed by one line
/// of space-separated symbols.
impl fmt::Display for MeasurementVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "q={} m={} noise={}", self.q, self.m(), self.noise)?;
        let mut first = true;
        for y in &self.symbols {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{y}")?;
            first = false;
        }
        writeln!(f)
    }
}

impl FromStr for MeasurementVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing measurement header".into()))?;
        let (mut q, mut m, mut noise) = (None, None, None);
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field `{field}`")))?;
            match key {
                "q" => q = value.parse::<usize>().ok(),
                "m" => m = value.parse::<usize>().ok(),
                "noise" => noise = Some(value.parse::<NoiseSpec>()?),
                _ => return Err(Error::Format(format!("unknown header key `{key}`"))),
            }
        }
        let (q, m, noise) = match (q, m, noise) {
            (Some(q), Some(m), Some(n)) => (q, m, n),
            _ => return Err(Error::Format(format!("incomplete header `{header}`"))),
        };
        let symbols = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad symbol `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        check_len("symbol count", m, symbols.len())?;
        MeasurementVector::new(symbols, q, noise)
    }
}

/// `argmax_j <a_j, W x>` with ties broken toward the lowest index.
pub fn quantize(code: &SimplexCode, w: &Matrix, x: &[f64]) -> Result<usize> {
    check_len("matrix rows", code.dim(), w.rows())?;
    let wx = w.apply(x)?;
    let mut scores = vec![0.0; code.q()];
    code.scores_into(&wx, &mut scores);
    Ok(argmax(&scores))
}

fn check_signal(ensemble: &SensingEnsemble, code: &SimplexCode, x: &[f64]) -> Result<()> {
    ensemble.check_code(code)?;
    check_len("signal length", ensemble.d(), x.len())?;
    let n = norm2(x);
    if !(n <= 1.0 + BALL_SLACK) {
        return Err(Error::Domain(format!(
            "signal norm {n} exceeds the unit ball"
        )));
    }
    Ok(())
}

/// Senses a single row `i`. `scores` is scratch space of length `q`.
fn sense_one(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    x: &[f64],
    noise: NoiseSpec,
    i: usize,
    scores: &mut [f64],
) -> Result<usize> {
    let w = ensemble.matrix(i)?;
    let wx = w.apply(x)?;
    code.scores_into(&wx, scores);
    match noise {
        NoiseSpec::Noiseless => Ok(argmax(scores)),
        NoiseSpec::PreQuantGaussian { sigma, seed } => {
            if sigma > 0.0 {
                let mut rng = keyed_rng(seed, Domain::PreQuantNoise, i as u64, 0);
                for s in scores.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *s += sigma * g;
                }
            }
            Ok(argmax(scores))
        }
        NoiseSpec::SymbolFlip { p, seed } => {
            let clean = argmax(scores);
            let mut rng = keyed_rng(seed, Domain::SymbolFlip, i as u64, 0);
            let u: f64 = rng.random();
            if u < p {
                Ok(clean)
            } else {
                Ok(rng.random_range(0..code.q()))
            }
        }
    }
}

/// Produces `y_i = Q_{W_i}(x)` for every `i`, with the requested noise.
///
/// Noise draws for row `i` come from a stream keyed by the noise seed and `i`
/// alone, so the same ensemble can be reused across noise settings and
/// `sigma = 0` or `p = 1` reproduce the noiseless symbols exactly.
pub fn sense(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    x: &[f64],
    noise: NoiseSpec,
) -> Result<MeasurementVector> {
    check_signal(ensemble, code, x)?;
    noise.validate()?;
    let symbols = (0..ensemble.m())
        .into_par_iter()
        .map_init(
            || vec![0.0; code.q()],
            |scores, i| sense_one(ensemble, code, x, noise, i, scores),
        )
        .collect::<Result<Vec<_>>>()?;
    MeasurementVector::new(symbols, code.q(), noise)
}

/// Fraction of positions where two measurement vectors disagree.
pub fn hamming_distance(u: &MeasurementVector, v: &MeasurementVector) -> Result<f64> {
    check_len("alphabet size", u.q(), v.q())?;
    check_len("measurement count", u.m(), v.m())?;
    let diff = u
        .symbols
        .iter()
        .zip(&v.symbols)
        .filter(|(a, b)| a != b)
        .count();
    Ok(diff as f64 / u.m() as f64)
}
