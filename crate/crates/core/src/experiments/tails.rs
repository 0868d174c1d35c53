use serde::{Deserialize, Serialize};

use super::stats::{compensated_sum, log_grid};
use super::{collect_results, field, observe, run_indexed, ExperimentError, ExperimentRecord, RunOptions};
use crate::ensembles::{stream_rng, streams, EnsembleParams, MpsSample};

/// Ten log-spaced radii from `10⁻³` to `0.5`.
pub fn default_r_grid() -> Vec<f64> {
    log_grid(1e-3, 0.5, 10)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    #[serde(rename = "D")]
    pub bond_dim: usize,
    pub count: usize,
    pub mean_trace: f64,
    pub mean_purity_norm: f64,
    /// Empirical `P(|tr ρ_l − mean| > r)` per radius.
    pub tail_trace: Vec<f64>,
    /// Empirical `P(|tr ρ_Norm² − mean| > r)` per radius.
    pub tail_purity_norm: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub d: usize,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub run: RunOptions,
    pub r_grid: Vec<f64>,
    pub rows: Vec<TailRow>,
    /// Every tail is non-increasing in `r`.
    pub monotone_in_r: bool,
    /// Per radius: the tail at the largest `D` is at most the tail at the
    /// smallest `D`, for both observables.
    pub decays_in_d: Vec<bool>,
    pub passed: bool,
}

/// Empirical deviation probabilities of `tr ρ_l` and `tr ρ_Norm²` around
/// their sample means.
pub fn concentration_tail_experiment(
    base: &EnsembleParams,
    bond_dims: &[usize],
    run: &RunOptions,
    r_grid: &[f64],
) -> Result<(TailReport, Vec<ExperimentRecord>), ExperimentError> {
    if bond_dims.is_empty() || !bond_dims.windows(2).all(|w| w[0] < w[1]) {
        return Err(ExperimentError::InvalidGrid(format!("D grid {bond_dims:?} must be increasing and non-empty")));
    }
    if r_grid.is_empty() || !r_grid.windows(2).all(|w| w[0] < w[1]) || r_grid[0] <= 0.0 {
        return Err(ExperimentError::InvalidGrid("r grid must be positive and increasing".into()));
    }
    run.require("concentration_tail_experiment", 1000)?;

    let mut rows = Vec::with_capacity(bond_dims.len());
    let mut all_records = Vec::new();
    for &bond_dim in bond_dims {
        let params = base.with_bond_dim(bond_dim);
        params.validate()?;
        let results = run_indexed(run.workers, run.samples, |i| {
            let mut rng = stream_rng(params.seed, streams::sample(bond_dim, i));
            observe(&params, i, &MpsSample::draw(&params, run.omega_dist, &mut rng))
        })?;
        let records = collect_results(results)?;
        let traces = field(&records, |r| Some(r.trace));
        let purities = field(&records, |r| r.purity_norm);
        let mean = |xs: &[f64]| compensated_sum(xs.iter().copied()) / xs.len() as f64;
        let (mean_trace, mean_purity_norm) = (mean(&traces), mean(&purities));
        let tails = |xs: &[f64], m: f64| -> Vec<f64> {
            r_grid
                .iter()
                .map(|&r| xs.iter().filter(|&&x| (x - m).abs() > r).count() as f64 / xs.len() as f64)
                .collect()
        };
        rows.push(TailRow {
            bond_dim,
            count: purities.len(),
            mean_trace,
            mean_purity_norm,
            tail_trace: tails(&traces, mean_trace),
            tail_purity_norm: tails(&purities, mean_purity_norm),
        });
        all_records.extend(records);
    }

    let non_increasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] <= w[0]);
    let monotone_in_r = rows.iter().all(|r| non_increasing(&r.tail_trace) && non_increasing(&r.tail_purity_norm));
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let decays_in_d: Vec<bool> = (0..r_grid.len())
        .map(|k| last.tail_trace[k] <= first.tail_trace[k] && last.tail_purity_norm[k] <= first.tail_purity_norm[k])
        .collect();
    let passed = monotone_in_r && decays_in_d.iter().all(|&b| b);
    let report = TailReport {
        d: base.d,
        n: base.n,
        l: base.l,
        seed: base.seed,
        run: *run,
        r_grid: r_grid.to_vec(),
        rows,
        monotone_in_r,
        decays_in_d,
        passed,
    };
    Ok((report, all_records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails_shrink() {
        let base = EnsembleParams::new(2, 1, 4, 2, 4).unwrap();
        let grid = [0.01, 0.05, 0.1, 2.0];
        let (report, records) =
            concentration_tail_experiment(&base, &[2, 16], &RunOptions::new(1000).with_workers(2), &grid).unwrap();
        assert_eq!(records.len(), 2000);
        assert!(report.monotone_in_r);
        for row in &report.rows {
            assert_eq!(row.tail_trace[3], 0.0);
            assert_eq!(row.tail_purity_norm[3], 0.0);
        }
        assert!(report.decays_in_d[1], "{report:?}");
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_r_grid();
        assert_eq!(grid.len(), 10);
        assert_eq!(grid[0], 1e-3);
        assert_eq!(grid[9], 0.5);
    }
}
