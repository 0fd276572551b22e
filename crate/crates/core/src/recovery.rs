//! Signal recovery from q-ary measurements.
//!
//! With `xi_i = W_iᵀ a_{y_i}` and `xi_bar` their mean, the linear-loss decoder
//! solves
//!
//! ```text
//! maximize  <xi_bar, u> - eta * |u|_1   subject to |u|_2 <= 1
//! ```
//!
//! [`recover_proximal`] runs the proximal iteration (gradient step, soft
//! threshold, ball projection). [`recover_closed_form`] returns the exact
//! maximizer `S_eta(xi_bar) / |S_eta(xi_bar)|` and serves as its oracle.
//! [`recover_loss`] minimizes the empirical risk of a convex surrogate loss
//! by projected subgradient descent.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm1, norm2, Matrix};
use crate::rng::{keyed_rng, Domain};
use crate::sensing::{MeasurementVector, SensingEnsemble};
use crate::simplex::SimplexCode;

/// Rows reduced together before partial sums are combined in order.
const REDUCE_CHUNK: usize = 32;

/// `xi_bar = (1/m) sum_i W_iᵀ a_{y_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    xi_bar: Vec<f64>,
    m: usize,
}

impl CorrelationVector {
    pub fn new(xi_bar: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        Ok(Self { xi_bar, m })
    }

    pub fn xi_bar(&self) -> &[f64] {
        &self.xi_bar
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.xi_bar.len()
    }
}

fn check_shapes(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    y: &MeasurementVector,
) -> Result<()> {
    ensemble.check_code(code)?;
    check_len("measurement alphabet", ensemble.q(), y.q())?;
    check_len("measurement count", ensemble.m(), y.m())
}

/// Computes the correlation vector. Rows are reduced in fixed-size chunks and
/// the chunk sums are added in index order, so the result does not depend on
/// the thread schedule.
pub fn correlation_vector(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    y: &MeasurementVector,
) -> Result<CorrelationVector> {
    check_shapes(ensemble, code, y)?;
    let d = ensemble.d();
    let m = ensemble.m();
    let symbols = y.symbols();
    let partials = (0..m.div_ceil(REDUCE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; d];
            for i in c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(m) {
                let w = ensemble.matrix(i)?;
                w.accumulate_transpose(code.row(symbols[i]), 1.0, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut xi_bar = vec![0.0; d];
    for p in &partials {
        for (s, v) in xi_bar.iter_mut().zip(p) {
            *s += v;
        }
    }
    let inv_m = 1.0 / m as f64;
    xi_bar.iter_mut().for_each(|v| *v *= inv_m);
    CorrelationVector::new(xi_bar, m)
}

/// Componentwise `max(1 - eta/|u_i|, 0) * u_i`, with `0 -> 0`.
pub fn soft_threshold(u: &[f64], eta: f64) -> Vec<f64> {
    u.iter()
        .map(|&v| {
            let a = v.abs();
            if a > eta {
                v.signum() * (a - eta)
            } else {
                0.0
            }
        })
        .collect()
}

/// Radial projection onto the Euclidean unit ball.
pub fn project_unit_ball(u: &[f64]) -> Vec<f64> {
    let n = norm2(u);
    if n > 1.0 {
        u.iter().map(|v| v / n).collect()
    } else {
        u.to_vec()
    }
}

/// `<xi_bar, u> - eta * |u|_1`
pub fn penalized_objective(xi: &CorrelationVector, u: &[f64], eta: f64) -> f64 {
    dot(xi.xi_bar(), u) - eta * norm1(u)
}

/// Penalty that keeps exactly the `s` largest-magnitude entries of `xi_bar`
/// after soft thresholding: the `(s+1)`-th largest `|xi_bar_i|`, or 0 when
/// `s >= d`.
pub fn sparsity_eta(xi: &CorrelationVector, s: usize) -> f64 {
    let mut mags: Vec<f64> = xi.xi_bar().iter().map(|v| v.abs()).collect();
    if s >= mags.len() {
        return 0.0;
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    mags[s]
}

/// Surrogate loss `V` applied to `-<a_{y_i}, W_i u>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// `V(t) = t`
    #[default]
    Linear,
    /// `V(t) = max(1 + t, 0)`
    Hinge,
    /// `V(t) = log(1 + e^t)`
    Logistic,
    /// `V(t) = e^t`
    Exponential,
}

impl Loss {
    pub fn value(self, t: f64) -> f64 {
        match self {
            Loss::Linear => t,
            Loss::Hinge => (1.0 + t).max(0.0),
            Loss::Logistic => {
                if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                }
            }
            Loss::Exponential => t.exp(),
        }
    }

    /// A subgradient of `V` at `t`.
    pub fn slope(self, t: f64) -> f64 {
        match self {
            Loss::Linear => 1.0,
            Loss::Hinge => {
                if t > -1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Loss::Logistic => {
                if t >= 0.0 {
                    1.0 / (1.0 + (-t).exp())
                } else {
                    let e = t.exp();
                    e / (1.0 + e)
                }
            }
            Loss::Exponential => t.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    /// l1 penalty weight.
    pub eta: f64,
    /// Gradient step size. Constant for the proximal solver; the subgradient
    /// solver uses `step / sqrt(t + 1)`.
    pub step: f64,
    /// Iteration cap. Zero returns the (projected) initialization.
    pub max_iters: usize,
    /// Stop when the iterate moves less than this in Euclidean norm.
    pub tol: f64,
    pub loss: Loss,
    /// Seed for the random unit-vector initialization.
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            step: 1.0,
            max_iters: 10_000,
            tol: 1e-8,
            loss: Loss::Linear,
            seed: 0,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {}", self.eta)));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Output of a recovery routine.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub x: Vec<f64>,
    /// Value of the solver's own objective at `x` (maximized for the linear
    /// decoders, minimized for surrogate losses).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the estimate is identically zero.
    pub degenerate: bool,
}

/// Exact maximizer of the penalized linear objective over the unit ball.
pub fn recover_closed_form(xi: &CorrelationVector, eta: f64) -> Recovery {
    let mut u = soft_threshold(xi.xi_bar(), eta);
    let n = norm2(&u);
    let degenerate = n == 0.0;
    if !degenerate {
        u.iter_mut().for_each(|v| *v /= n);
    }
    let objective = penalized_objective(xi, &u, eta);
    Recovery {
        x: u,
        objective,
        iterations: 0,
        converged: true,
        degenerate,
    }
}

/// Uniform draw from the unit sphere in `R^d`.
pub fn random_unit_vector(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = keyed_rng(seed, Domain::Init, d as u64, 0);
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm2(&v);
        if n > 0.0 {
            return v.into_iter().map(|t| t / n).collect();
        }
    }
}

fn prox_step(u: &[f64], direction: &[f64], step: f64, eta: f64) -> Vec<f64> {
    let moved: Vec<f64> = u.iter().zip(direction).map(|(a, g)| a + step * g).collect();
    project_unit_ball(&soft_threshold(&moved, step * eta))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::squared_distance(a, b).sqrt()
}

/// Proximal iteration for the penalized linear decoder:
///
/// ```text
/// u <- u + step * xi_bar
/// u <- S_{step*eta}(u)
/// u <- u * min(1/|u|, 1)
/// ```
///
/// started from a seeded random unit vector. Stops once an update moves less
/// than `tol`; otherwise returns the best iterate seen, flagged unconverged.
pub fn recover_proximal(xi: &CorrelationVector, config: &RecoveryConfig) -> Result<Recovery> {
    config.validate()?;
    if config.loss != Loss::Linear {
        return Err(Error::InvalidParameter(
            "the proximal solver handles the linear loss only".into(),
        ));
    }
    let eta = config.eta;
    let mut u = random_unit_vector(xi.d(), config.seed);
    let mut best = (penalized_objective(xi, &u, eta), u.clone());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let next = prox_step(&u, xi.xi_bar(), config.step, eta);
        iterations += 1;
        let moved = distance(&next, &u);
        u = next;
        let obj = penalized_objective(xi, &u, eta);
        if obj >= best.0 {
            best = (obj, u.clone());
        }
        if moved < config.tol {
            converged = true;
            break;
        }
    }
    // at convergence the last iterate is the answer, even if an earlier one
    // scored marginally higher through rounding
    let (objective, x) = if converged {
        (penalized_objective(xi, &u, eta), u)
    } else {
        best
    };
    let degenerate = x.iter().all(|&v| v == 0.0);
    Ok(Recovery {
        x,
        objective,
        iterations,
        converged,
        degenerate,
    })
}

/// Empirical risk `(1/m) sum_i V(-<xi_i, u>) + eta |u|_1`.
fn surrogate_risk(rows: &[Vec<f64>], u: &[f64], loss: Loss, eta: f64) -> f64 {
    let sum: f64 = rows.iter().map(|r| loss.value(-dot(r, u))).sum();
    sum / rows.len() as f64 + eta * norm1(u)
}

/// Per-measurement vectors `xi_i = W_iᵀ a_{y_i}`.
pub fn measurement_correlations(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    y: &MeasurementVector,
) -> Result<Vec<Vec<f64>>> {
    check_shapes(ensemble, code, y)?;
    let symbols = y.symbols();
    (0..ensemble.m())
        .into_par_iter()
        .map(|i| {
            let w: Matrix = ensemble.matrix(i)?;
            let mut xi = vec![0.0; ensemble.d()];
            w.accumulate_transpose(code.row(symbols[i]), 1.0, &mut xi)?;
            Ok(xi)
        })
        .collect()
}

/// Minimizes the empirical surrogate risk over the unit ball by projected
/// subgradient descent with steps `step / sqrt(t + 1)`. A nonzero `eta` adds
/// the l1 penalty through the same soft-threshold step as the proximal
/// solver. The best iterate (never worse than the initialization) is
/// returned.
pub fn recover_loss(
    ensemble: &SensingEnsemble,
    code: &SimplexCode,
    y: &MeasurementVector,
    config: &RecoveryConfig,
) -> Result<Recovery> {
    config.validate()?;
    let rows = measurement_correlations(ensemble, code, y)?;
    let loss = config.loss;
    let eta = config.eta;
    let inv_m = 1.0 / rows.len() as f64;

    let mut u = project_unit_ball(&random_unit_vector(ensemble.d(), config.seed));
    let mut best = (surrogate_risk(&rows, &u, loss, eta), u.clone());
    let mut converged = false;
    let mut iterations = 0;
    let mut descent = vec![0.0; ensemble.d()];
    while iterations < config.max_iters {
        // negative subgradient of the smooth part: (1/m) sum V'(-z_i) xi_i
        descent.iter_mut().for_each(|v| *v = 0.0);
        for r in &rows {
            let slope = loss.slope(-dot(r, &u));
            if slope != 0.0 {
                crate::linalg::axpy(slope * inv_m, r, &mut descent);
            }
        }
        let step = config.step / ((iterations + 1) as f64).sqrt();
        let next = prox_step(&u, &descent, step, eta);
        iterations += 1;
        let moved = distance(&next, &u);
        u = next;
        let risk = surrogate_risk(&rows, &u, loss, eta);
        if risk < best.0 {
            best = (risk, u.clone());
        }
        if moved < config.tol {
            converged = true;
            break;
        }
    }
    let (objective, x) = best;
    let degenerate = x.iter().all(|&v| v == 0.0);
    Ok(Recovery {
        x,
        objective,
        iterations,
        converged,
        degenerate,
    })
}
