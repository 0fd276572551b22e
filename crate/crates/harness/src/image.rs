//! Image reconstruction experiment.
//!
//! read PGM -> Haar forward -> keep top-k -> normalize -> sense -> recover
//! -> rescale -> Haar inverse -> clamp and write PGM. SNR is measured against
//! the top-k approximation of the input, i.e. the best the pipeline could
//! reproduce.

use std::fs;
use std::path::Path;
use std::time::Instant;

use qary_cs::analysis::{reconstruction_error, snr_db};
use qary_cs::recovery::{correlation_vector, recover_proximal};
use qary_cs::rng::derive_seed;
use qary_cs::sensing::sense;
use qary_cs::signals::pgm::{read_pgm, write_pgm};
use qary_cs::signals::{
    haar2d_forward, haar2d_inverse, normalize, synthetic_scene, threshold_top_k, ImagePlane,
};
use qary_cs::simplex::build_simplex_code;
use qary_cs::{NoiseSpec, RecoveryConfig, SensingEnsemble};

use crate::error::{HarnessError, Result};
use crate::runner::{execute, resolve_eta, Report, RunOptions};
use crate::spec::{ExperimentSpec, Kind};
use crate::table::ResultRow;

/// Sparse coefficient representation of an image.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub width: usize,
    pub height: usize,
    /// Unit-norm thresholded coefficients.
    pub signal: Vec<f64>,
    /// Norm removed by normalization.
    pub scale: f64,
    /// The thresholded image, the reference for SNR.
    pub reference: ImagePlane,
}

pub fn prepare_image(img: &ImagePlane, k: usize) -> Result<PreparedImage> {
    let coeffs = haar2d_forward(img)?;
    if k > coeffs.len() {
        return Err(HarnessError::InvalidSpec(format!(
            "k = {k} exceeds the {} available coefficients",
            coeffs.len()
        )));
    }
    let kept = threshold_top_k(&coeffs, k)?;
    let reference = haar2d_inverse(&kept, img.width(), img.height())?;
    let (signal, scale) = normalize(&kept)?;
    Ok(PreparedImage {
        width: img.width(),
        height: img.height(),
        signal,
        scale,
        reference,
    })
}

/// Result of one sensed-and-recovered image.
#[derive(Debug, Clone)]
pub struct ImageRecovery {
    pub image: ImagePlane,
    /// Squared error between the unit-norm coefficient vectors.
    pub error: f64,
    pub snr_db: f64,
}

pub fn reconstruct(
    prepared: &PreparedImage,
    spec: &ExperimentSpec,
    m: usize,
    q: usize,
    sigma: f64,
    trial: usize,
) -> Result<(ImageRecovery, u64)> {
    let d = prepared.signal.len();
    let trial_seed = derive_seed(spec.master_seed, &[d as u64, spec.k as u64, trial as u64]);
    let code = build_simplex_code(q)?;
    let ens = SensingEnsemble::new(derive_seed(trial_seed, &[2]), m, q, d)?;
    let noise = if sigma > 0.0 {
        NoiseSpec::PreQuantGaussian {
            sigma,
            seed: derive_seed(trial_seed, &[3]),
        }
    } else {
        NoiseSpec::Noiseless
    };
    let y = sense(&ens, &code, &prepared.signal, noise)?;
    let xi = correlation_vector(&ens, &code, &y)?;
    let config = RecoveryConfig {
        eta: resolve_eta(spec.eta, &xi, spec.k),
        seed: derive_seed(trial_seed, &[4]),
        ..Default::default()
    };
    let rec = recover_proximal(&xi, &config)?;
    let error = reconstruction_error(&prepared.signal, &rec.x)?;
    let coeffs: Vec<f64> = rec.x.iter().map(|v| v * prepared.scale).collect();
    let image = haar2d_inverse(&coeffs, prepared.width, prepared.height)?.clamped(0.0, 1.0);
    let snr = snr_db(prepared.reference.pixels(), image.pixels())?;
    Ok((
        ImageRecovery {
            image,
            error,
            snr_db: snr,
        },
        trial_seed,
    ))
}

fn load_input(spec: &ExperimentSpec) -> Result<ImagePlane> {
    match &spec.input {
        Some(path) => Ok(read_pgm(path)?),
        None => Ok(synthetic_scene(64, 64)?),
    }
}

pub fn recon_file_name(q: usize, sigma: f64, trial: usize) -> String {
    format!("recon_q{q}_sigma{sigma}_t{trial}.pgm")
}

pub fn run_image(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    spec.validate()?;
    if spec.kind != Kind::Image {
        return Err(HarnessError::InvalidSpec(format!(
            "expected an image spec, got {}",
            spec.kind
        )));
    }
    let input = load_input(spec)?;
    let prepared = prepare_image(&input, spec.k)?;
    let d = prepared.signal.len();

    let mut cells = Vec::new();
    for &m in &spec.m {
        for &q in &spec.q {
            for &sigma in &spec.sigma {
                for t in 0..spec.trials {
                    cells.push((m, q, sigma, t));
                }
            }
        }
    }
    let outcomes = execute(cells.len(), opts, |i| {
        let (m, q, sigma, t) = cells[i];
        let start = Instant::now();
        let (rec, seed) = reconstruct(&prepared, spec, m, q, sigma, t)?;
        Ok((rec, seed, start.elapsed().as_secs_f64() * 1e3))
    })?;

    if let Some(dir) = &spec.image_dir {
        fs::create_dir_all(dir)?;
        write_pgm(dir.join("original.pgm"), &input)?;
        write_pgm(dir.join("reference.pgm"), &prepared.reference)?;
        for (&(_, q, sigma, t), (rec, _, _)) in cells.iter().zip(&outcomes) {
            write_pgm(dir.join(recon_file_name(q, sigma, t)), &rec.image)?;
        }
    }

    let mut report = Report {
        kind: Kind::Image,
        rows: Vec::new(),
        estimates: Vec::new(),
        points: Vec::new(),
        fitted_c: None,
        notes: Vec::new(),
    };
    for (&(m, q, sigma, t), (rec, seed, ms)) in cells.iter().zip(&outcomes) {
        report.rows.push(ResultRow {
            kind: Kind::Image,
            d,
            s: spec.k,
            m,
            q,
            sigma: Some(sigma),
            p: None,
            trial: t,
            seed: *seed,
            error: rec.error,
            snr_db: Some(rec.snr_db),
            bound: None,
            runtime_ms: opts.timing.then_some(*ms),
        });
        report
            .notes
            .push(format!("m={m} q={q} sigma={sigma} trial={t}: SNR {:.2} dB", rec.snr_db));
    }
    Ok(report)
}

/// Writes `report` as CSV to `path`, creating parent directories.
pub fn write_csv(path: &Path, report: &Report) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, report.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prepared_image_is_unit_and_k_sparse() {
        let img = synthetic_scene(16, 16).unwrap();
        let p = prepare_image(&img, 20).unwrap();
        assert_eq!(p.signal.iter().filter(|v| **v != 0.0).count(), 20);
        assert!((qary_cs::linalg::norm2(&p.signal) - 1.0).abs() < 1e-12);
        assert!(prepare_image(&img, 1000).is_err());
    }

    #[test]
    fn rejects_non_power_of_two() {
        let img = ImagePlane::new(12, 8, vec![0.5; 96]).unwrap();
        assert!(prepare_image(&img, 4).is_err());
    }

    #[test]
    fn zero_m_is_invalid() {
        let mut spec = ExperimentSpec::defaults(Kind::Image);
        spec.m = vec![0];
        let err = run_image(&spec, &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
