use serde::{Deserialize, Serialize};

use super::{collect_results, observe, run_indexed, ExperimentError, ExperimentRecord, RunOptions, Summary, SIGMA_BAND};
use crate::ensembles::{haar_unitary, sample_boundaries, stream_rng, streams, EnsembleParams, MpsSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanTraceOptions {
    pub run: RunOptions,
    /// Keep `U` fixed across samples.
    pub fixed_u: bool,
    /// Keep `Ω` fixed across samples.
    pub fixed_omega: bool,
}

impl MeanTraceOptions {
    pub fn new(run: RunOptions) -> Self {
        Self { run, fixed_u: true, fixed_omega: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanTraceReport {
    pub params: EnsembleParams,
    pub options: MeanTraceOptions,
    pub trace: Summary,
    pub degenerate: usize,
    pub expected: f64,
    /// `(mean − 1/2) / stderr`
    pub z: f64,
    pub passed: bool,
}

/// Mean of `tr ρ_l` over fresh `(Λ, V, W)`, optionally with `U` and `Ω`
/// held fixed.
pub fn mean_trace_experiment(
    params: &EnsembleParams,
    options: &MeanTraceOptions,
) -> Result<(MeanTraceReport, Vec<ExperimentRecord>), ExperimentError> {
    params.validate()?;
    options.run.require("mean_trace_experiment", 10)?;
    let dim = params.d * params.bond_dim;
    let fixed_u = options.fixed_u.then(|| haar_unitary(dim, &mut stream_rng(params.seed, streams::FIXED_U)));
    let fixed_omega = options.fixed_omega.then(|| {
        options
            .run
            .omega_dist
            .sample(params.bond_dim, &mut stream_rng(params.seed, streams::FIXED_OMEGA))
    });

    let results = run_indexed(options.run.workers, options.run.samples, |i| {
        let mut rng = stream_rng(params.seed, streams::sample(params.bond_dim, i));
        let u = match &fixed_u {
            Some(u) => u.clone(),
            None => haar_unitary(dim, &mut rng),
        };
        let mut boundaries = sample_boundaries(params.bond_dim, options.run.omega_dist, &mut rng);
        if let Some(omega) = &fixed_omega {
            boundaries = crate::ensembles::Boundaries::from_parts(
                boundaries.v,
                boundaries.w,
                boundaries.lambda,
                omega.clone(),
            );
        }
        let sample = MpsSample::from_parts(params.d, u, boundaries)?;
        Ok::<_, ExperimentError>(observe(params, i, &sample)?)
    })?;
    let records = collect_results(results)?;

    let traces: Vec<f64> = records.iter().map(|r| r.trace).collect();
    let trace = Summary::of(&traces);
    let degenerate = records.iter().filter(|r| r.degenerate).count();
    let expected = 0.5;
    let report = MeanTraceReport {
        params: *params,
        options: *options,
        trace,
        degenerate,
        expected,
        z: (trace.mean - expected) / trace.stderr,
        passed: trace.agrees_with(expected, SIGMA_BAND),
    };
    Ok((report, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_dimension_one_is_uniform_mean() {
        let params = EnsembleParams::new(2, 1, 4, 2, 3).unwrap();
        let (report, records) =
            mean_trace_experiment(&params, &MeanTraceOptions::new(RunOptions::new(4000).with_workers(1))).unwrap();
        assert!(report.passed, "{report:?}");
        // With D = 1 every contraction reduces to λ.
        assert!(records.iter().all(|r| (0.0..=1.0).contains(&r.trace)));
    }

    #[test]
    fn small_run_matches_one_half() {
        let params = EnsembleParams::new(2, 6, 6, 2, 5).unwrap();
        let (report, records) =
            mean_trace_experiment(&params, &MeanTraceOptions::new(RunOptions::new(400).with_workers(2))).unwrap();
        assert_eq!(records.len(), 400);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn too_few_samples() {
        let params = EnsembleParams::new(2, 2, 2, 2, 0).unwrap();
        assert!(matches!(
            mean_trace_experiment(&params, &MeanTraceOptions::new(RunOptions::new(5))),
            Err(ExperimentError::TooFewSamples { .. })
        ));
    }
}
