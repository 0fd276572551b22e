//! Experiment descriptions and their defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    SweepQ,
    SweepM,
    Surface,
    Budget,
    NoiseSigma,
    NoiseFlip,
    Image,
    Lambda,
    Width,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::SweepQ,
        Kind::SweepM,
        Kind::Surface,
        Kind::Budget,
        Kind::NoiseSigma,
        Kind::NoiseFlip,
        Kind::Image,
        Kind::Lambda,
        Kind::Width,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::SweepQ => "sweep_q",
            Kind::SweepM => "sweep_m",
            Kind::Surface => "surface",
            Kind::Budget => "budget",
            Kind::NoiseSigma => "noise_sigma",
            Kind::NoiseFlip => "noise_flip",
            Kind::Image => "image",
            Kind::Lambda => "lambda",
            Kind::Width => "width",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| HarnessError::InvalidSpec(format!("unknown experiment kind `{s}`")))
    }
}

/// How the l1 penalty is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaPolicy {
    /// Threshold at the `(s+1)`-th largest correlation magnitude, so the
    /// estimate has the target sparsity.
    AutoS,
    Fixed(f64),
}

impl FromStr for EtaPolicy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(EtaPolicy::AutoS);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(EtaPolicy::Fixed(v)),
            _ => Err(HarnessError::InvalidSpec(format!(
                "eta must be `auto` or a number >= 0, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Kind,
    /// Ambient dimensions. Only the width table sweeps more than one.
    pub d: Vec<usize>,
    /// Sparsity levels. Only the width table sweeps more than one.
    pub s: Vec<usize>,
    pub m: Vec<usize>,
    pub q: Vec<usize>,
    pub sigma: Vec<f64>,
    pub p: Vec<f64>,
    pub trials: usize,
    pub eta: EtaPolicy,
    pub master_seed: u64,
    /// Bit budget for `budget` runs.
    pub budget: usize,
    /// Coefficients kept by the image thresholding step.
    pub k: usize,
    /// Monte Carlo samples for `lambda` and `width`.
    pub samples: usize,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Where `image` writes reconstructed PGM files.
    pub image_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Defaults matching the reference experiments for each kind.
    pub fn defaults(kind: Kind) -> Self {
        let mut spec = ExperimentSpec {
            kind,
            d: vec![100],
            s: vec![5],
            m: vec![70],
            q: vec![2, 4, 8, 16, 32],
            sigma: vec![0.0],
            p: vec![1.0],
            trials: 20,
            eta: EtaPolicy::AutoS,
            master_seed: 1,
            budget: 512,
            k: 400,
            samples: 200_000,
            input: None,
            out: None,
            image_dir: None,
        };
        match kind {
            Kind::SweepQ => {}
            Kind::SweepM => {
                spec.q = vec![3];
                spec.m = vec![25, 50, 100, 200, 400];
            }
            Kind::Surface => {
                spec.m = vec![25, 50, 100, 200];
                spec.q = vec![2, 4, 8, 16];
            }
            Kind::Budget => {
                spec.q = vec![2, 4, 16];
                spec.m = vec![];
            }
            Kind::NoiseSigma => {
                spec.m = vec![200];
                spec.q = vec![32];
                spec.sigma = vec![0.0, 0.4, 0.8, 1.6];
            }
            Kind::NoiseFlip => {
                spec.m = vec![200];
                spec.q = vec![8];
                spec.p = vec![0.6, 0.75, 0.9, 1.0];
            }
            Kind::Image => {
                spec.m = vec![2048];
                spec.q = vec![2, 32];
                spec.sigma = vec![0.0, 0.8];
                spec.trials = 1;
            }
            Kind::Lambda => {
                spec.q = vec![2, 3, 4, 8, 16, 32, 64];
                spec.sigma = vec![0.0];
            }
            Kind::Width => {
                spec.s = vec![1, 2, 5, 10, 20];
                spec.samples = 2000;
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.d.is_empty() || self.s.is_empty() {
            return bad("d and s must be non-empty".into());
        }
        if self.kind != Kind::Width && (self.d.len() != 1 || self.s.len() != 1) {
            return bad(format!("{} takes a single d and s", self.kind));
        }
        for &d in &self.d {
            for &s in &self.s {
                if d == 0 || s == 0 || s > d {
                    return bad(format!("need 1 <= s <= d, got d={d} s={s}"));
                }
            }
        }
        let uses_m = !matches!(self.kind, Kind::Budget | Kind::Lambda | Kind::Width);
        if uses_m && self.m.is_empty() {
            return bad("m grid is empty".into());
        }
        if self.m.iter().any(|&m| m == 0) {
            return bad("m values must be >= 1".into());
        }
        let uses_q = self.kind != Kind::Width;
        if uses_q && self.q.is_empty() {
            return bad("q grid is empty".into());
        }
        if self.q.iter().any(|&q| q < 2) {
            return bad("q values must be >= 2".into());
        }
        if self.sigma.is_empty() || self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("sigma grid must be non-empty with values >= 0".into());
        }
        if self.p.is_empty() || self.p.iter().any(|&p| !(p > 0.5 && p <= 1.0)) {
            return bad("p grid must be non-empty with values in (1/2, 1]".into());
        }
        if let EtaPolicy::Fixed(e) = self.eta {
            if !(e.is_finite() && e >= 0.0) {
                return bad("eta must be >= 0".into());
            }
        }
        if self.kind == Kind::Image {
            if self.k == 0 {
                return bad("k must be >= 1".into());
            }
        }
        if matches!(self.kind, Kind::Lambda | Kind::Width) && self.samples == 0 {
            return bad("samples must be >= 1".into());
        }
        Ok(())
    }

    pub fn d0(&self) -> usize {
        self.d[0]
    }

    pub fn s0(&self) -> usize {
        self.s[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in Kind::ALL {
            ExperimentSpec::defaults(kind).validate().unwrap();
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in Kind::ALL {
            assert_eq!(kind.name().parse::<Kind>().unwrap(), kind);
        }
        assert_eq!("sweep-q".parse::<Kind>().unwrap(), Kind::SweepQ);
        assert!("sweep".parse::<Kind>().is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut s = ExperimentSpec::defaults(Kind::SweepM);
        s.m.clear();
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(Kind::SweepQ);
        s.q = vec![1];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(Kind::SweepQ);
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(Kind::NoiseFlip);
        s.p = vec![0.5];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(Kind::Image);
        s.m = vec![0];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(Kind::SweepQ);
        s.s = vec![200];
        assert!(s.validate().is_err());
    }

    #[test]
    fn eta_policy_parse() {
        assert_eq!("auto".parse::<EtaPolicy>().unwrap(), EtaPolicy::AutoS);
        assert_eq!("0.25".parse::<EtaPolicy>().unwrap(), EtaPolicy::Fixed(0.25));
        assert!("-1".parse::<EtaPolicy>().is_err());
        assert!("x".parse::<EtaPolicy>().is_err());
    }
}
