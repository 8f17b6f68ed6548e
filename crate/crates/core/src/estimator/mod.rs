//! Estimators built on the sampling and separability layers.
//!
//! Work is split into units (curve bins, blocks of eigenvalue samples) whose
//! random streams depend only on the run seed and the unit index. Units run on
//! a rayon pool and are reassembled in index order, so results do not depend on
//! the number of workers.

mod curve;
mod fit;
mod jumps;
mod probability;
pub mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{SequenceKind, DEFAULT_MAX_REJECTS};

pub use curve::{
    ansatz_dispersion, estimate_curve, estimate_sigma_at, estimate_sigma_on_slice, AnsatzDispersion,
    CurveBin, SeparabilityCurve,
};
pub use fit::{fit_segment, LinearFit};
pub use jumps::{detect_jumps, Jump, JumpReport, DEFAULT_Z_THRESHOLD};
pub use probability::{
    absolute_separability_probability, curve_based_probability, separability_probability, Estimate,
};

/// Default bins per curve.
pub const DEFAULT_BINS: usize = 500;
/// Default fixed-C spectra per bin.
pub const DEFAULT_SPECTRA_PER_BIN: usize = 40;
/// Default Haar conjugations per spectrum.
pub const DEFAULT_GROUP_SAMPLES: usize = 250;

/// Run-wide sampling settings shared by all estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Sequence driving Haar draws and simplex proposals.
    pub sequence: SequenceKind,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default. Never changes results.
    pub workers: usize,
    pub max_rejects: u64,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        SamplerConfig {
            sequence: SequenceKind::LowDiscrepancy,
            seed,
            workers: 0,
            max_rejects: DEFAULT_MAX_REJECTS,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_sequence(mut self, sequence: SequenceKind) -> Self {
        self.sequence = sequence;
        self
    }

    /// Runs `f` on a pool sized by `workers`.
    pub(crate) fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

// Stream tags keep the random streams of different purposes disjoint.
const TAG_CURVE_SPECTRA: u64 = 1 << 40;
const TAG_CURVE_GROUP: u64 = 2 << 40;
const TAG_LAMBDA: u64 = 3 << 40;
const TAG_LAMBDA_GROUP: u64 = 4 << 40;
const TAG_DISPERSION: u64 = 5 << 40;
