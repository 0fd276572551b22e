//! Sweep execution.
//!
//! A run is a list of grid points, each repeated `trials` times. Every
//! `(grid point, trial)` job is independent and derives all of its
//! randomness from `(master_seed, d, s, trial)`, so jobs may execute in any
//! order or in parallel and still produce identical rows. The signal, the
//! sensing ensemble and the noise stream of a trial are shared across grid
//! points, which makes comparisons along a grid axis paired.

use std::time::Instant;

use rayon::prelude::*;

use qary_cs::analysis::stats::{fit_line, fit_scale, mean_stderr, pearson};
use qary_cs::analysis::{estimate_lambda, estimate_mean_width_k1, reconstruction_error};
use qary_cs::recovery::{correlation_vector, recover_proximal, sparsity_eta};
use qary_cs::rng::derive_seed;
use qary_cs::sensing::sense;
use qary_cs::signals::gauss_bernoulli;
use qary_cs::simplex::build_simplex_code;
use qary_cs::{NoiseSpec, RecoveryConfig, SensingEnsemble};

use crate::error::{HarnessError, Result};
use crate::spec::{EtaPolicy, ExperimentSpec, Kind};
use crate::table::{estimates_csv, results_csv, EstimateRow, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Run jobs on the rayon pool.
    pub parallel: bool,
    /// Record wall-clock time per job in `runtime_ms`.
    pub timing: bool,
    /// Execute jobs in a seeded pseudo-random order. Output order is
    /// unaffected.
    pub shuffle: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            timing: true,
            shuffle: None,
        }
    }
}

/// Noise applied at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialNoise {
    None,
    Sigma(f64),
    Flip(f64),
}

impl TrialNoise {
    fn spec(self, seed: u64) -> NoiseSpec {
        match self {
            TrialNoise::None => NoiseSpec::Noiseless,
            TrialNoise::Sigma(sigma) => NoiseSpec::PreQuantGaussian { sigma, seed },
            TrialNoise::Flip(p) => NoiseSpec::SymbolFlip { p, seed },
        }
    }

    fn sigma(self) -> Option<f64> {
        match self {
            TrialNoise::Sigma(s) => Some(s),
            _ => None,
        }
    }

    fn p(self) -> Option<f64> {
        match self {
            TrialNoise::Flip(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub m: usize,
    pub q: usize,
    pub noise: TrialNoise,
}

/// Mean error over the trials of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub point: GridPoint,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Fitted bound curve at this point.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: Kind,
    pub rows: Vec<ResultRow>,
    pub estimates: Vec<EstimateRow>,
    pub points: Vec<PointSummary>,
    /// Least-squares constant of the bound curve.
    pub fitted_c: Option<f64>,
    /// Human-readable summary lines (fits, correlations, warnings).
    pub notes: Vec<String>,
}

impl Report {
    fn empty(kind: Kind) -> Self {
        Report {
            kind,
            rows: Vec::new(),
            estimates: Vec::new(),
            points: Vec::new(),
            fitted_c: None,
            notes: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        match self.kind {
            Kind::Lambda | Kind::Width => estimates_csv(self.kind, &self.estimates),
            _ => results_csv(&self.rows),
        }
    }

    pub fn point_means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Runs `job(i)` for `i in 0..n` and returns the results in index order.
pub(crate) fn execute<T, F>(n: usize, opts: &RunOptions, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = opts.shuffle {
        order.sort_by_key(|&i| derive_seed(seed, &[i as u64]));
    }
    let done: Vec<(usize, Result<T>)> = if opts.parallel {
        order.par_iter().map(|&i| (i, job(i))).collect()
    } else {
        order.iter().map(|&i| (i, job(i))).collect()
    };
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (i, r) in done {
        slots[i] = Some(r?);
    }
    Ok(slots.into_iter().map(|s| s.expect("every job ran")).collect())
}

/// Seeds for one trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialSeeds {
    pub trial: u64,
    pub signal: u64,
    pub ensemble: u64,
    pub noise: u64,
    pub init: u64,
}

impl TrialSeeds {
    pub fn new(master_seed: u64, d: usize, s: usize, trial: usize) -> Self {
        let trial_seed = derive_seed(master_seed, &[d as u64, s as u64, trial as u64]);
        Self {
            trial: trial_seed,
            signal: derive_seed(trial_seed, &[1]),
            ensemble: derive_seed(trial_seed, &[2]),
            noise: derive_seed(trial_seed, &[3]),
            init: derive_seed(trial_seed, &[4]),
        }
    }
}

pub(crate) fn resolve_eta(policy: EtaPolicy, xi: &qary_cs::CorrelationVector, s: usize) -> f64 {
    match policy {
        EtaPolicy::AutoS => sparsity_eta(xi, s),
        EtaPolicy::Fixed(v) => v,
    }
}

/// Senses a Gauss–Bernoulli signal and recovers it with the proximal
/// decoder; returns the squared error and the trial seed.
pub fn run_trial(
    master_seed: u64,
    d: usize,
    s: usize,
    point: GridPoint,
    eta: EtaPolicy,
    trial: usize,
) -> Result<(f64, u64)> {
    let seeds = TrialSeeds::new(master_seed, d, s, trial);
    let x = gauss_bernoulli(d, s, seeds.signal)?.vector;
    let code = build_simplex_code(point.q)?;
    let ens = SensingEnsemble::new(seeds.ensemble, point.m, point.q, d)?;
    let y = sense(&ens, &code, &x, point.noise.spec(seeds.noise))?;
    let xi = correlation_vector(&ens, &code, &y)?;
    let config = RecoveryConfig {
        eta: resolve_eta(eta, &xi, s),
        seed: seeds.init,
        ..Default::default()
    };
    let rec = recover_proximal(&xi, &config)?;
    Ok((reconstruction_error(&x, &rec.x)?, seeds.trial))
}

/// Runs every `(point, trial)` pair, fits `C` in `error ≈ C * feature(point)`
/// and fills the bound column.
fn run_grid(
    spec: &ExperimentSpec,
    opts: &RunOptions,
    points: &[GridPoint],
    feature: impl Fn(&GridPoint) -> f64,
) -> Result<Report> {
    let (d, s, trials) = (spec.d0(), spec.s0(), spec.trials);
    let outcomes = execute(points.len() * trials, opts, |job| {
        let (pi, t) = (job / trials, job % trials);
        let start = Instant::now();
        let (error, seed) = run_trial(spec.master_seed, d, s, points[pi], spec.eta, t)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        Ok((error, seed, ms))
    })?;

    let features: Vec<f64> = points.iter().map(&feature).collect();
    let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let row_features: Vec<f64> = (0..outcomes.len()).map(|j| features[j / trials]).collect();
    let c = fit_scale(&row_features, &errors);

    let mut report = Report::empty(spec.kind);
    report.fitted_c = Some(c);
    for (j, &(error, seed, ms)) in outcomes.iter().enumerate() {
        let pt = points[j / trials];
        report.rows.push(ResultRow {
            kind: spec.kind,
            d,
            s,
            m: pt.m,
            q: pt.q,
            sigma: pt.noise.sigma(),
            p: pt.noise.p(),
            trial: j % trials,
            seed,
            error,
            snr_db: None,
            bound: Some(c * features[j / trials]),
            runtime_ms: opts.timing.then_some(ms),
        });
    }
    for (pi, pt) in points.iter().enumerate() {
        let (mean, stderr) = mean_stderr(&errors[pi * trials..(pi + 1) * trials]);
        report.points.push(PointSummary {
            point: *pt,
            mean,
            stderr,
            trials,
            bound: c * features[pi],
        });
    }
    report.notes.push(format!("fitted bound constant C = {c:.6}"));
    Ok(report)
}

fn ln(q: usize) -> f64 {
    (q as f64).ln()
}

pub fn run_sweep_q(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::SweepQ)?;
    let m = single(&spec.m, "m")?;
    let points: Vec<GridPoint> = spec
        .q
        .iter()
        .map(|&q| GridPoint { m, q, noise: TrialNoise::None })
        .collect();
    let mut report = run_grid(spec, opts, &points, |p| 1.0 / ln(p.q).sqrt())?;
    if points.len() >= 2 {
        let x: Vec<f64> = points.iter().map(|p| 1.0 / ln(p.q).sqrt()).collect();
        let r = pearson(&report.point_means(), &x);
        report.notes.push(format!("pearson(mean error, 1/sqrt(ln q)) = {r:.4}"));
        let decreasing = report.point_means().windows(2).all(|w| w[1] < w[0]);
        report.notes.push(format!("mean error strictly decreasing in q: {decreasing}"));
    }
    Ok(report)
}

pub fn run_sweep_m(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::SweepM)?;
    let q = single(&spec.q, "q")?;
    let points: Vec<GridPoint> = spec
        .m
        .iter()
        .map(|&m| GridPoint { m, q, noise: TrialNoise::None })
        .collect();
    let mut report = run_grid(spec, opts, &points, |p| 1.0 / (p.m as f64).sqrt())?;
    if points.len() >= 2 {
        let slope = loglog_slope(&report);
        report.notes.push(format!("log-log slope of mean error vs m = {slope:.4}"));
    }
    Ok(report)
}

/// Slope of `ln(mean error)` against `ln(m)` across the report's points.
pub fn loglog_slope(report: &Report) -> f64 {
    let lx: Vec<f64> = report.points.iter().map(|p| (p.point.m as f64).ln()).collect();
    let ly: Vec<f64> = report.points.iter().map(|p| p.mean.ln()).collect();
    fit_line(&lx, &ly).slope
}

fn surface_feature(p: &GridPoint) -> f64 {
    1.0 / (p.m as f64 * ln(p.q)).sqrt()
}

pub fn run_surface(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::Surface)?;
    let mut points = Vec::new();
    for &m in &spec.m {
        for &q in &spec.q {
            points.push(GridPoint { m, q, noise: TrialNoise::None });
        }
    }
    let mut report = run_grid(spec, opts, &points, surface_feature)?;
    if points.len() >= 2 {
        let x: Vec<f64> = points.iter().map(surface_feature).collect();
        let r = pearson(&report.point_means(), &x);
        report.notes.push(format!("pearson(mean error, 1/sqrt(m ln q)) = {r:.4}"));
    }
    Ok(report)
}

/// Operating points `(m, q)` with `m = floor(budget / log2 q)`; alphabets that
/// do not fit in the budget are skipped.
pub fn budget_points(budget: usize, qs: &[usize]) -> Vec<(usize, usize)> {
    qs.iter()
        .filter_map(|&q| {
            let m = (budget as f64 / (q as f64).log2()).floor() as usize;
            (m >= 1).then_some((m, q))
        })
        .collect()
}

pub fn run_budget(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::Budget)?;
    let ops = budget_points(spec.budget, &spec.q);
    if ops.is_empty() {
        let mut report = Report::empty(spec.kind);
        report.notes.push(format!(
            "warning: budget of {} bits is smaller than log2(q) for every q; no operating points",
            spec.budget
        ));
        return Ok(report);
    }
    let points: Vec<GridPoint> = ops
        .iter()
        .map(|&(m, q)| GridPoint { m, q, noise: TrialNoise::None })
        .collect();
    let mut report = run_grid(spec, opts, &points, surface_feature)?;
    // with m log2 q = budget exactly, m ln q = budget ln 2 at every point, so
    // the bound predicts equal errors; floor() only raises the bound
    let ops_text: Vec<String> = ops.iter().map(|(m, q)| format!("({m}, {q})")).collect();
    report.notes.push(format!("operating points (m, q): {}", ops_text.join(" ")));
    report.notes.push(format!(
        "predicted common bound level C/sqrt(budget ln 2) = {:.6}",
        report.fitted_c.unwrap_or(0.0) / (spec.budget as f64 * std::f64::consts::LN_2).sqrt()
    ));
    Ok(report)
}

pub fn run_noise_sigma(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::NoiseSigma)?;
    let mut points = Vec::new();
    for &m in &spec.m {
        for &q in &spec.q {
            for &sigma in &spec.sigma {
                points.push(GridPoint { m, q, noise: TrialNoise::Sigma(sigma) });
            }
        }
    }
    run_grid(spec, opts, &points, |p| {
        let sigma = p.noise.sigma().unwrap_or(0.0);
        (1.0 + sigma * sigma).sqrt() * surface_feature(p)
    })
}

pub fn run_noise_flip(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::NoiseFlip)?;
    let mut points = Vec::new();
    for &m in &spec.m {
        for &q in &spec.q {
            for &p in &spec.p {
                points.push(GridPoint { m, q, noise: TrialNoise::Flip(p) });
            }
        }
    }
    run_grid(spec, opts, &points, |pt| {
        let p = pt.noise.p().unwrap_or(1.0);
        surface_feature(pt) / (2.0 * p - 1.0)
    })
}

/// Tabulates `lambda(q, sigma)` and fits `C` in `lambda ≈ C sqrt(ln q / (1 + sigma^2))`.
pub fn run_lambda(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::Lambda)?;
    let mut cells = Vec::new();
    for &q in &spec.q {
        for &sigma in &spec.sigma {
            cells.push((q, sigma));
        }
    }
    let seed = spec.master_seed;
    let samples = spec.samples;
    let estimates = execute(cells.len(), opts, |i| {
        let (q, sigma) = cells[i];
        Ok(estimate_lambda(q, sigma, samples, seed)?)
    })?;
    let feature = |q: usize, sigma: f64| (ln(q) / (1.0 + sigma * sigma)).sqrt();
    let x: Vec<f64> = cells.iter().map(|&(q, s)| feature(q, s)).collect();
    let y: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let c = fit_scale(&x, &y);
    let mut report = Report::empty(Kind::Lambda);
    report.fitted_c = Some(c);
    for (e, xi) in estimates.iter().zip(&x) {
        report.estimates.push(EstimateRow {
            kind: Kind::Lambda,
            first: e.q,
            second: e.sigma,
            n_samples: e.n_samples,
            seed,
            value: e.value,
            stderr: e.stderr,
            bound: c * xi,
        });
    }
    report.notes.push(format!("fitted C in lambda ~ C sqrt(ln q/(1+sigma^2)) = {c:.6}"));
    if x.len() >= 2 {
        let fit = fit_line(&x, &y);
        report.notes.push(format!(
            "lambda vs sqrt(ln q/(1+sigma^2)): slope {:.4}, intercept {:.4}, R^2 {:.4}",
            fit.slope, fit.intercept, fit.r_squared
        ));
    }
    Ok(report)
}

/// Tabulates the mean width of `K1` over `(d, s)`; the bound column is the
/// smallest envelope `C sqrt(s ln(2d/s))` lying above every estimate.
pub fn run_width(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    expect_kind(spec, Kind::Width)?;
    let mut cells = Vec::new();
    for &d in &spec.d {
        for &s in &spec.s {
            cells.push((d, s));
        }
    }
    let seed = spec.master_seed;
    let samples = spec.samples;
    let estimates = execute(cells.len(), opts, |i| {
        let (d, s) = cells[i];
        Ok(estimate_mean_width_k1(d, s, samples, seed)?)
    })?;
    let feature = |d: usize, s: usize| (s as f64 * (2.0 * d as f64 / s as f64).ln()).sqrt();
    let ratios: Vec<f64> = estimates.iter().map(|e| e.value / feature(e.d, e.s)).collect();
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    let mut report = Report::empty(Kind::Width);
    report.fitted_c = Some(c);
    for e in &estimates {
        report.estimates.push(EstimateRow {
            kind: Kind::Width,
            first: e.d,
            second: e.s as f64,
            n_samples: e.n_samples,
            seed,
            value: e.value,
            stderr: e.stderr,
            bound: c * feature(e.d, e.s),
        });
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    report.notes.push(format!(
        "w(K1)/sqrt(s ln(2d/s)) ranges over [{lo:.4}, {c:.4}]"
    ));
    Ok(report)
}

fn expect_kind(spec: &ExperimentSpec, kind: Kind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(HarnessError::InvalidSpec(format!(
            "expected a {kind} spec, got {}",
            spec.kind
        )));
    }
    Ok(())
}

fn single(values: &[usize], name: &str) -> Result<usize> {
    match values {
        [v] => Ok(*v),
        _ => Err(HarnessError::InvalidSpec(format!(
            "this experiment takes a single {name}, got {values:?}"
        ))),
    }
}

/// Dispatches on `spec.kind`.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    match spec.kind {
        Kind::SweepQ => run_sweep_q(spec, opts),
        Kind::SweepM => run_sweep_m(spec, opts),
        Kind::Surface => run_surface(spec, opts),
        Kind::Budget => run_budget(spec, opts),
        Kind::NoiseSigma => run_noise_sigma(spec, opts),
        Kind::NoiseFlip => run_noise_flip(spec, opts),
        Kind::Image => crate::image::run_image(spec, opts),
        Kind::Lambda => run_lambda(spec, opts),
        Kind::Width => run_width(spec, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_arithmetic() {
        assert_eq!(budget_points(512, &[2, 4, 16]), vec![(512, 2), (256, 4), (128, 16)]);
        assert_eq!(budget_points(10, &[3]), vec![(6, 3)]);
        assert!(budget_points(1, &[4, 16]).is_empty());
    }

    #[test]
    fn execute_preserves_order() {
        let opts = RunOptions { shuffle: Some(5), ..Default::default() };
        let out = execute(50, &opts, |i| Ok(i * 2)).unwrap();
        assert_eq!(out, (0..50).map(|i| i * 2).collect::<Vec<_>>());
        let err = execute(5, &opts, |i| {
            if i == 3 {
                Err(HarnessError::InvalidSpec("boom".into()))
            } else {
                Ok(i)
            }
        });
        assert!(err.is_err());
    }

    #[test]
    fn trial_seeds_ignore_grid_axes() {
        let a = TrialSeeds::new(1, 100, 5, 0);
        let b = TrialSeeds::new(1, 100, 5, 1);
        assert_ne!(a.trial, b.trial);
        assert_ne!(a.signal, a.ensemble);
        let p1 = GridPoint { m: 40, q: 4, noise: TrialNoise::None };
        let p2 = GridPoint { m: 40, q: 4, noise: TrialNoise::Sigma(0.0) };
        let p3 = GridPoint { m: 40, q: 4, noise: TrialNoise::Flip(1.0) };
        let e1 = run_trial(1, 30, 3, p1, EtaPolicy::AutoS, 0).unwrap();
        assert_eq!(e1, run_trial(1, 30, 3, p2, EtaPolicy::AutoS, 0).unwrap());
        assert_eq!(e1, run_trial(1, 30, 3, p3, EtaPolicy::AutoS, 0).unwrap());
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let spec = ExperimentSpec::defaults(Kind::SweepM);
        assert!(run_sweep_q(&spec, &RunOptions::default()).is_err());
    }
}
