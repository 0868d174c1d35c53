use serde::{Deserialize, Serialize};

use super::stats::{log_log_slope, strictly_decreasing};
use super::{collect_results, field, observe, run_indexed, ExperimentError, ExperimentRecord, RunOptions, Summary, SIGMA_BAND};
use crate::ensembles::{stream_rng, streams, EnsembleParams, MpsSample};

/// Largest allowed median `|tr ρ_Norm² − 1/d^l|` at the top of the grid.
pub const FINAL_DEVIATION_BAND: f64 = 0.05;
/// Allowed gap between the sup-distance slope and half the purity slope.
pub const HALF_SLOPE_TOLERANCE: f64 = 0.15;
/// Largest acceptable fraction of degenerate samples at `D ≥ 16`.
pub const DEGENERATE_RATE_LIMIT: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "D")]
    pub bond_dim: usize,
    pub degenerate: usize,
    pub trace: Summary,
    pub purity_unnorm: Summary,
    pub purity_norm: Summary,
    /// `|tr ρ_Norm² − 1/d^l|`
    pub deviation: Summary,
    pub sup_dist: Summary,
    pub renyi2: Summary,
    /// `SIGMA_BAND · stderr(tr ρ_l²)`
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingChecks {
    /// `mean tr ρ_l² ≤ 1/(4d^l) + margin` at every `D`.
    pub purity_bound: bool,
    pub margin_decreasing: bool,
    pub median_deviation_decreasing: bool,
    pub final_median_deviation: f64,
    pub final_deviation_within_band: bool,
    pub deviation_slope_negative: bool,
    pub median_sup_dist_decreasing: bool,
    /// `sup_dist ≤ sqrt(d^l (tr ρ_Norm² − 1/d^l))` on every record.
    pub chebyshev: bool,
    /// `1/d^l ≤ tr ρ_Norm² ≤ 1` on every record.
    pub purity_range: bool,
    pub degenerate_rate: f64,
    pub degenerate_rate_ok: bool,
    /// `|slope(sup_dist) − slope(deviation)/2| ≤ HALF_SLOPE_TOLERANCE`.
    pub half_slope: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub d: usize,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub run: RunOptions,
    pub bond_dims: Vec<usize>,
    /// `1/(4 d^l)`
    pub purity_bound: f64,
    /// `1/d^l`
    pub mixed_purity: f64,
    pub rows: Vec<ScalingRow>,
    /// Log-log slope of the median deviation against `D`.
    pub deviation_slope: f64,
    /// Log-log slope of the median sup-distance against `D`.
    pub sup_dist_slope: f64,
    pub checks: ScalingChecks,
    pub passed: bool,
}

/// Purity statistics along an increasing grid of bond dimensions.
pub fn purity_scaling_experiment(
    base: &EnsembleParams,
    bond_dims: &[usize],
    run: &RunOptions,
) -> Result<(ScalingReport, Vec<ExperimentRecord>), ExperimentError> {
    if bond_dims.is_empty() || !bond_dims.windows(2).all(|w| w[0] < w[1]) {
        return Err(ExperimentError::InvalidGrid(format!("D grid {bond_dims:?} must be increasing and non-empty")));
    }
    run.require("purity_scaling_experiment", 50)?;
    let window = base.window_dim() as f64;
    let mixed = 1.0 / window;
    let bound = 1.0 / (4.0 * window);

    let mut rows = Vec::with_capacity(bond_dims.len());
    let mut all_records = Vec::with_capacity(bond_dims.len() * run.samples);
    for &bond_dim in bond_dims {
        let params = base.with_bond_dim(bond_dim);
        params.validate()?;
        let results = run_indexed(run.workers, run.samples, |i| {
            let mut rng = stream_rng(params.seed, streams::sample(bond_dim, i));
            let sample = MpsSample::draw(&params, run.omega_dist, &mut rng);
            observe(&params, i, &sample)
        })?;
        let records = collect_results(results)?;
        let purity_unnorm = Summary::of(&field(&records, |r| Some(r.purity_unnorm)));
        rows.push(ScalingRow {
            bond_dim,
            degenerate: records.iter().filter(|r| r.degenerate).count(),
            trace: Summary::of(&field(&records, |r| Some(r.trace))),
            purity_unnorm,
            purity_norm: Summary::of(&field(&records, |r| r.purity_norm)),
            deviation: Summary::of(&field(&records, |r| r.purity_norm.map(|p| (p - mixed).abs()))),
            sup_dist: Summary::of(&field(&records, |r| r.sup_dist)),
            renyi2: Summary::of(&field(&records, |r| r.renyi2)),
            margin: SIGMA_BAND * purity_unnorm.stderr,
        });
        all_records.extend(records);
    }

    let medians = |get: fn(&ScalingRow) -> f64| rows.iter().map(get).collect::<Vec<f64>>();
    let deviation_medians = medians(|r| r.deviation.median);
    let sup_medians = medians(|r| r.sup_dist.median);
    let xs: Vec<f64> = bond_dims.iter().map(|&b| b as f64).collect();
    let pair = |ys: &[f64]| xs.iter().copied().zip(ys.iter().copied()).collect::<Vec<_>>();
    let deviation_slope = log_log_slope(&pair(&deviation_medians));
    let sup_dist_slope = log_log_slope(&pair(&sup_medians));

    let valid: Vec<&ExperimentRecord> = all_records.iter().filter(|r| !r.degenerate).collect();
    let final_median_deviation = *deviation_medians.last().expect("grid is non-empty");
    let (degenerate_total, counted) = rows
        .iter()
        .filter(|r| r.bond_dim >= 16)
        .fold((0, 0), |(deg, tot), r| (deg + r.degenerate, tot + run.samples));
    let degenerate_rate = if counted > 0 { degenerate_total as f64 / counted as f64 } else { 0.0 };
    let checks = ScalingChecks {
        purity_bound: rows.iter().all(|r| r.purity_unnorm.mean <= bound + r.margin),
        margin_decreasing: strictly_decreasing(&medians(|r| r.margin)),
        median_deviation_decreasing: strictly_decreasing(&deviation_medians),
        final_median_deviation,
        final_deviation_within_band: final_median_deviation < FINAL_DEVIATION_BAND,
        deviation_slope_negative: deviation_slope < 0.0,
        median_sup_dist_decreasing: strictly_decreasing(&sup_medians),
        chebyshev: valid.iter().all(|r| {
            let pn = r.purity_norm.unwrap_or(f64::NAN);
            r.sup_dist.unwrap_or(f64::NAN) <= (window * (pn - mixed)).max(0.0).sqrt() + 1e-9
        }),
        purity_range: valid.iter().all(|r| {
            let pn = r.purity_norm.unwrap_or(f64::NAN);
            pn >= mixed - 1e-9 && pn <= 1.0 + 1e-9
        }),
        degenerate_rate,
        degenerate_rate_ok: degenerate_rate < DEGENERATE_RATE_LIMIT,
        half_slope: (sup_dist_slope - deviation_slope / 2.0).abs() <= HALF_SLOPE_TOLERANCE,
    };
    let passed = checks.purity_bound
        && checks.margin_decreasing
        && checks.median_deviation_decreasing
        && checks.final_deviation_within_band
        && checks.deviation_slope_negative
        && checks.median_sup_dist_decreasing
        && checks.chebyshev
        && checks.purity_range;
    let report = ScalingReport {
        d: base.d,
        n: base.n,
        l: base.l,
        seed: base.seed,
        run: *run,
        bond_dims: bond_dims.to_vec(),
        purity_bound: bound,
        mixed_purity: mixed,
        rows,
        deviation_slope,
        sup_dist_slope,
        checks,
        passed,
    };
    Ok((report, all_records))
}
