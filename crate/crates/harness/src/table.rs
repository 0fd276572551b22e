//! CSV output. Column order is fixed; inapplicable fields are left empty and
//! numbers use Rust's locale-free shortest round-trip formatting.

use std::fmt::Write as _;

use crate::spec::Kind;

pub const RESULT_HEADER: &str = "kind,d,s,m,q,sigma,p,trial,seed,error,snr_db,bound,runtime_ms";
pub const LAMBDA_HEADER: &str = "kind,q,sigma,n_samples,seed,value,stderr,bound";
pub const WIDTH_HEADER: &str = "kind,d,s,n_samples,seed,value,stderr,bound";

/// One trial of a recovery experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub kind: Kind,
    pub d: usize,
    pub s: usize,
    pub m: usize,
    pub q: usize,
    pub sigma: Option<f64>,
    pub p: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub snr_db: Option<f64>,
    pub bound: Option<f64>,
    pub runtime_ms: Option<f64>,
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.d,
            self.s,
            self.m,
            self.q,
            opt(self.sigma),
            opt(self.p),
            self.trial,
            self.seed,
            self.error,
            opt(self.snr_db),
            opt(self.bound),
            opt(self.runtime_ms.map(|t| format!("{t:.3}"))),
        )
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// A Monte Carlo estimate row for the `lambda` and `width` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub kind: Kind,
    /// `(q, sigma)` for lambda, `(d, s)` for width.
    pub first: usize,
    pub second: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub value: f64,
    pub stderr: f64,
    pub bound: f64,
}

pub fn estimates_csv(kind: Kind, rows: &[EstimateRow]) -> String {
    let mut out = String::new();
    out.push_str(if kind == Kind::Lambda {
        LAMBDA_HEADER
    } else {
        WIDTH_HEADER
    });
    out.push('\n');
    for r in rows {
        let second = if kind == Kind::Width {
            (r.second as usize).to_string()
        } else {
            r.second.to_string()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.kind, r.first, second, r.n_samples, r.seed, r.value, r.stderr, r.bound
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_layout() {
        let row = ResultRow {
            kind: Kind::NoiseSigma,
            d: 100,
            s: 5,
            m: 200,
            q: 32,
            sigma: Some(0.8),
            p: None,
            trial: 3,
            seed: 42,
            error: 0.125,
            snr_db: None,
            bound: Some(0.5),
            runtime_ms: Some(1.23456),
        };
        assert_eq!(row.to_csv_line(), "noise_sigma,100,5,200,32,0.8,,3,42,0.125,,0.5,1.235");
        let csv = results_csv(&[row]);
        assert!(csv.starts_with(RESULT_HEADER));
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), RESULT_HEADER.split(',').count());
    }

    #[test]
    fn estimate_layout() {
        let r = EstimateRow {
            kind: Kind::Width,
            first: 100,
            second: 5.0,
            n_samples: 10,
            seed: 1,
            value: 10.5,
            stderr: 0.1,
            bound: 11.0,
        };
        assert_eq!(
            estimates_csv(Kind::Width, &[r]),
            format!("{WIDTH_HEADER}\nwidth,100,5,10,1,10.5,0.1,11\n")
        );
    }
}
