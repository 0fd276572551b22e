use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qary_harness::image::write_csv;
use qary_harness::{run, EtaPolicy, ExperimentSpec, HarnessError, Kind, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "qary", version, about = "q-ary compressive sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Error versus alphabet size q at fixed m.
    SweepQ(Common),
    /// Error versus measurement count m at fixed q.
    SweepM(Common),
    /// Error over an (m, q) grid.
    Surface(Common),
    /// Operating points with m * log2(q) within a bit budget.
    Budget(Common),
    /// Error versus pre-quantization Gaussian noise level.
    NoiseSigma(Common),
    /// Error versus symbol retention probability.
    NoiseFlip(Common),
    /// Wavelet-sparse image reconstruction.
    Image(Common),
    /// Monte Carlo table of the recovery constant lambda(q, sigma).
    Lambda(Common),
    /// Monte Carlo table of the Gaussian mean width of the l1/l2 set.
    Width(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Ambient dimension (comma list for `width`).
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Sparsity (comma list for `width`).
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    /// Measurement counts.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Alphabet sizes.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Pre-quantization noise levels.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Symbol retention probabilities.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// l1 penalty: `auto` (target sparsity) or a number.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bit budget for `budget`.
    #[arg(long)]
    budget: Option<usize>,
    /// Wavelet coefficients kept by `image`.
    #[arg(long)]
    k: Option<usize>,
    /// Monte Carlo samples for `lambda` and `width`.
    #[arg(long)]
    samples: Option<usize>,
    /// Input PGM for `image`; a built-in 64x64 scene when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for reconstructed PGM files (`image`).
    #[arg(long)]
    image_dir: Option<PathBuf>,
    /// Run jobs on a single thread.
    #[arg(long)]
    serial: bool,
    /// Leave the runtime_ms column empty.
    #[arg(long)]
    no_timing: bool,
}

impl Command {
    fn split(self) -> (Kind, Common) {
        match self {
            Command::SweepQ(c) => (Kind::SweepQ, c),
            Command::SweepM(c) => (Kind::SweepM, c),
            Command::Surface(c) => (Kind::Surface, c),
            Command::Budget(c) => (Kind::Budget, c),
            Command::NoiseSigma(c) => (Kind::NoiseSigma, c),
            Command::NoiseFlip(c) => (Kind::NoiseFlip, c),
            Command::Image(c) => (Kind::Image, c),
            Command::Lambda(c) => (Kind::Lambda, c),
            Command::Width(c) => (Kind::Width, c),
        }
    }
}

fn build_spec(kind: Kind, c: Common) -> Result<(ExperimentSpec, RunOptions), HarnessError> {
    let mut spec = ExperimentSpec::defaults(kind);
    if let Some(v) = c.d {
        spec.d = v;
    }
    if let Some(v) = c.s {
        spec.s = v;
    }
    if let Some(v) = c.m {
        spec.m = v;
    }
    if let Some(v) = c.q {
        spec.q = v;
    }
    if let Some(v) = c.trials {
        spec.trials = v;
    }
    if let Some(v) = c.sigma {
        spec.sigma = v;
    }
    if let Some(v) = c.p {
        spec.p = v;
    }
    if let Some(v) = c.eta {
        spec.eta = v.parse::<EtaPolicy>()?;
    }
    if let Some(v) = c.seed {
        spec.master_seed = v;
    }
    if let Some(v) = c.budget {
        spec.budget = v;
    }
    if let Some(v) = c.k {
        spec.k = v;
    }
    if let Some(v) = c.samples {
        spec.samples = v;
    }
    spec.input = c.input;
    spec.out = c.out;
    spec.image_dir = c.image_dir;
    spec.validate()?;
    let opts = RunOptions {
        parallel: !c.serial,
        timing: !c.no_timing,
        shuffle: None,
    };
    Ok((spec, opts))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = cli.command.split();
    let result = build_spec(kind, common).and_then(|(spec, opts)| {
        let report = run(&spec, &opts)?;
        match &spec.out {
            Some(path) => write_csv(path, &report)?,
            None => std::io::stdout().write_all(report.to_csv().as_bytes())?,
        }
        for note in &report.notes {
            eprintln!("{note}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
