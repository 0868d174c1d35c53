//! Monte Carlo experiments over the random MPS ensemble.
//!
//! Every sample draws from its own ChaCha20 stream keyed by the run seed and
//! the sample's position, and results are collected in sample order, so the
//! output of a run does not depend on the number of workers.

mod averages;
mod lipschitz;
mod mean_trace;
mod scaling;
pub mod stats;
mod tails;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use averages::{boundary_averages_experiment, AverageRow, AveragesReport, Relation};
pub use lipschitz::{
    lipschitz_probe, LipschitzOptions, LipschitzPair, LipschitzReport, PerturbationKind, DEFAULT_SCALES,
};
pub use mean_trace::{mean_trace_experiment, MeanTraceOptions, MeanTraceReport};
pub use scaling::{purity_scaling_experiment, ScalingChecks, ScalingReport, ScalingRow};
pub use stats::Summary;
pub use tails::{concentration_tail_experiment, default_r_grid, TailReport, TailRow};

use crate::ensembles::{EnsembleError, EnsembleParams, MpsSample, OmegaDist};
use crate::mps::{self, MpsError};
use crate::weingarten::WeingartenError;

/// Width of equality bands, in standard errors.
pub const SIGMA_BAND: f64 = 5.0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{what} needs at least {min} samples, got {got}")]
    TooFewSamples { what: &'static str, min: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Weingarten(#[from] WeingartenError),
}

/// Sample count, `Ω` law and parallelism shared by all experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub samples: usize,
    pub omega_dist: OmegaDist,
    /// Worker threads; `0` uses every available core.
    pub workers: usize,
}

impl RunOptions {
    pub fn new(samples: usize) -> Self {
        Self { samples, omega_dist: OmegaDist::Dirichlet, workers: 0 }
    }

    pub fn with_omega(self, omega_dist: OmegaDist) -> Self {
        Self { omega_dist, ..self }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    fn require(&self, what: &'static str, min: usize) -> Result<(), ExperimentError> {
        if self.samples < min {
            return Err(ExperimentError::TooFewSamples { what, min, got: self.samples });
        }
        Ok(())
    }
}

/// One Monte Carlo observation of the window state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub d: usize,
    #[serde(rename = "D")]
    pub bond_dim: usize,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub sample: usize,
    pub trace: f64,
    pub purity_unnorm: f64,
    pub purity_norm: Option<f64>,
    pub sup_dist: Option<f64>,
    pub renyi2: Option<f64>,
    pub degenerate: bool,
}

impl ExperimentRecord {
    pub const HEADER: [&'static str; 12] = [
        "d", "D", "n", "l", "seed", "sample", "trace", "purity_unnorm", "purity_norm", "sup_dist", "renyi2",
        "degenerate",
    ];

    pub fn params(&self) -> EnsembleParams {
        EnsembleParams { d: self.d, bond_dim: self.bond_dim, n: self.n, l: self.l, seed: self.seed }
    }
}

/// Contracts the window of `sample` and evaluates every observable.
pub fn observe(params: &EnsembleParams, index: usize, sample: &MpsSample) -> Result<ExperimentRecord, MpsError> {
    let rho = mps::reduced_density(sample, params)?;
    let trace = rho.trace();
    let purity_unnorm = rho.purity();
    let mut record = ExperimentRecord {
        d: params.d,
        bond_dim: params.bond_dim,
        n: params.n,
        l: params.l,
        seed: params.seed,
        sample: index,
        trace,
        purity_unnorm,
        purity_norm: None,
        sup_dist: None,
        renyi2: None,
        degenerate: false,
    };
    match rho.normalize() {
        Ok(normalized) => {
            record.purity_norm = Some(normalized.purity());
            record.sup_dist = Some(normalized.sup_distance_to_mixed()?);
            record.renyi2 = Some(normalized.renyi2()?);
        }
        Err(MpsError::Degenerate { .. }) => record.degenerate = true,
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Evaluates `f(0), …, f(count − 1)` on a pool of `workers` threads and
/// returns the results in index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

fn collect_results<T, E: Into<ExperimentError>>(results: Vec<Result<T, E>>) -> Result<Vec<T>, ExperimentError> {
    results.into_iter().map(|r| r.map_err(Into::into)).collect()
}

fn field(records: &[ExperimentRecord], get: impl Fn(&ExperimentRecord) -> Option<f64>) -> Vec<f64> {
    records.iter().filter_map(get).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::stream_rng;

    #[test]
    fn record_invariants() {
        for seed in 0..20 {
            let params = EnsembleParams::new(2, 8, 6, 2, seed).unwrap();
            let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(seed, 0));
            let r = observe(&params, 0, &s).unwrap();
            let pn = r.purity_norm.unwrap();
            assert!((pn - r.purity_unnorm / (r.trace * r.trace)).abs() < 1e-9);
            assert!((0.25 - 1e-9..=1.0 + 1e-9).contains(&pn));
            assert!(r.sup_dist.unwrap() <= (4.0 * (pn - 0.25)).max(0.0).sqrt() + 1e-9);
        }
    }

    #[test]
    fn degenerate_sample_is_flagged() {
        let params = EnsembleParams::new(2, 2, 2, 2, 0).unwrap();
        let mut s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(0, 0));
        s.lambda = vec![0.0; 2];
        s.refresh();
        let r = observe(&params, 3, &s).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.purity_norm, None);
        assert_eq!(r.sample, 3);
    }

    #[test]
    fn indexed_runs_keep_order() {
        let one = run_indexed(1, 50, |i| i * i).unwrap();
        let four = run_indexed(4, 50, |i| i * i).unwrap();
        assert_eq!(one, four);
        assert_eq!(one[7], 49);
    }
}
