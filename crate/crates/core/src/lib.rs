//! q-ary compressive sensing.
//!
//! A signal `x` in the unit ball is measured through `m` Gaussian matrices
//! `W_i` of shape `(q-1) x d`; each measurement is the index of the simplex
//! code vector best aligned with `W_i x`. Recovery maximizes the average
//! alignment `(1/m) sum_i <a_{y_i}, W_i u>` over the unit ball, optionally
//! with an l1 penalty for sparse signals.
//!
//! - [`simplex`]: the simplex code.
//! - [`sensing`]: ensembles, quantization, noise channels.
//! - [`recovery`]: correlation vector, proximal and closed-form decoders,
//!   surrogate-loss decoders.
//! - [`analysis`]: Monte Carlo constants, bound curves, error metrics.
//! - [`signals`]: sparse test signals, Haar transform, PGM I/O.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod recovery;
pub mod rng;
pub mod sensing;
pub mod signals;
pub mod simplex;

pub use error::{Error, Result};
pub use recovery::{CorrelationVector, Loss, Recovery, RecoveryConfig};
pub use sensing::{MeasurementVector, NoiseSpec, SensingEnsemble};
pub use simplex::SimplexCode;
