//! Serializable experiment configurations and a single entry point that runs
//! them, shared by the command line and by replays of saved summaries.

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleParams;
use crate::experiments::{
    boundary_averages_experiment, concentration_tail_experiment, lipschitz_probe, mean_trace_experiment,
    purity_scaling_experiment, ExperimentError, ExperimentRecord, LipschitzOptions, LipschitzPair,
    MeanTraceOptions, RunOptions,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum RunConfig {
    MeanTrace {
        params: EnsembleParams,
        options: MeanTraceOptions,
    },
    Purity {
        base: EnsembleParams,
        #[serde(rename = "D")]
        bond_dims: Vec<usize>,
        run: RunOptions,
    },
    Averages {
        #[serde(rename = "D")]
        bond_dim: usize,
        seed: u64,
        run: RunOptions,
    },
    Lipschitz {
        params: EnsembleParams,
        options: LipschitzOptions,
    },
    Tails {
        base: EnsembleParams,
        #[serde(rename = "D")]
        bond_dims: Vec<usize>,
        run: RunOptions,
        r_grid: Vec<f64>,
    },
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        match self {
            RunConfig::MeanTrace { params, .. } | RunConfig::Lipschitz { params, .. } => params.seed,
            RunConfig::Purity { base, .. } | RunConfig::Tails { base, .. } => base.seed,
            RunConfig::Averages { seed, .. } => *seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::MeanTrace { .. } => "mean-trace",
            RunConfig::Purity { .. } => "purity",
            RunConfig::Averages { .. } => "averages",
            RunConfig::Lipschitz { .. } => "lipschitz",
            RunConfig::Tails { .. } => "tails",
        }
    }
}

/// Per-sample output of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Records {
    Samples(Vec<ExperimentRecord>),
    Pairs(Vec<LipschitzPair>),
    None,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub result: serde_json::Value,
    pub records: Records,
}

pub fn execute(config: &RunConfig) -> Result<RunOutcome, ExperimentError> {
    Ok(match config {
        RunConfig::MeanTrace { params, options } => {
            let (report, records) = mean_trace_experiment(params, options)?;
            RunOutcome { passed: report.passed, result: to_value(&report), records: Records::Samples(records) }
        }
        RunConfig::Purity { base, bond_dims, run } => {
            let (report, records) = purity_scaling_experiment(base, bond_dims, run)?;
            RunOutcome { passed: report.passed, result: to_value(&report), records: Records::Samples(records) }
        }
        RunConfig::Averages { bond_dim, seed, run } => {
            let report = boundary_averages_experiment(*bond_dim, *seed, run)?;
            RunOutcome { passed: report.passed, result: to_value(&report), records: Records::None }
        }
        RunConfig::Lipschitz { params, options } => {
            let (report, pairs) = lipschitz_probe(params, options)?;
            RunOutcome { passed: report.passed, result: to_value(&report), records: Records::Pairs(pairs) }
        }
        RunConfig::Tails { base, bond_dims, run, r_grid } => {
            let (report, records) = concentration_tail_experiment(base, bond_dims, run, r_grid)?;
            RunOutcome { passed: report.passed, result: to_value(&report), records: Records::Samples(records) }
        }
    })
}

fn to_value<T: Serialize>(report: &T) -> serde_json::Value {
    serde_json::to_value(report).expect("report serializes")
}
