use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{wg_cycle_type, WeingartenError};
use crate::symgroup::{partitions, CycleType};

const MAX_BOUND_DEGREE: usize = 8;

/// Slopes must land within this distance of `−p − |σ|`.
pub const SLOPE_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassRatio {
    pub cycle_type: String,
    pub length: usize,
    pub wg: f64,
    /// `|Wg(n, σ)| · n^{p + |σ|(1 − 2/k)}`
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u64,
    pub max_ratio: f64,
    pub classes: Vec<ClassRatio>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassSlope {
    pub cycle_type: String,
    /// Least-squares slope of `log|Wg(n, σ)|` against `log n` over the grid.
    pub slope: f64,
    pub expected: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: usize,
    pub k: u32,
    pub rows: Vec<BoundRow>,
    /// Largest normalized ratio anywhere on the grid.
    pub envelope: f64,
    /// No grid point in the upper half of the grid exceeds the envelope of
    /// the lower half.
    pub bounded: bool,
    pub slopes: Vec<ClassSlope>,
}

impl BoundReport {
    pub fn slopes_ok(&self) -> bool {
        self.slopes.iter().all(|s| s.within_tolerance)
    }
}

/// Tabulates `max_σ |Wg(n, σ)| · n^{p + |σ|(1 − 2/k)}` along `n_grid`.
///
/// Requires `p^k ≤ min(n_grid)`. The log-log slopes are fitted with at least
/// two grid points and compared against `−p − |σ|`.
pub fn wg_bound_ratio(p: usize, k: u32, n_grid: &[u64]) -> Result<BoundReport, WeingartenError> {
    if p == 0 || p > MAX_BOUND_DEGREE {
        return Err(WeingartenError::DegreeTooLarge {
            what: "wg_bound_ratio",
            p,
            max: MAX_BOUND_DEGREE,
        });
    }
    if k == 0 {
        return Err(WeingartenError::Malformed("k must be positive".into()));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let Some(&n_min) = grid.first() else {
        return Err(WeingartenError::Malformed("empty n grid".into()));
    };
    let pk = (p as f64).powi(k as i32);
    if pk > n_min as f64 {
        return Err(WeingartenError::BoundHypothesis { pk, n: n_min });
    }
    let classes: Vec<CycleType> = partitions(p)?.into_iter().map(CycleType).collect();
    let exponent_slope = 1.0 - 2.0 / k as f64;

    let mut rows = Vec::with_capacity(grid.len());
    let mut logs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); classes.len()];
    for &n in &grid {
        let mut row = Vec::with_capacity(classes.len());
        for (c, class) in classes.iter().enumerate() {
            let value = wg_cycle_type(n, class)?;
            let abs = value.abs().to_f64().expect("finite");
            let exponent = p as f64 + class.length() as f64 * exponent_slope;
            let ratio = abs * (n as f64).powf(exponent);
            logs[c].push(((n as f64).ln(), abs.ln()));
            row.push(ClassRatio {
                cycle_type: class.to_string(),
                length: class.length(),
                wg: value.to_f64().expect("finite"),
                ratio,
            });
        }
        let max_ratio = row.iter().map(|c| c.ratio).fold(0.0, f64::max);
        rows.push(BoundRow { n, max_ratio, classes: row });
    }

    let envelope = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let half = rows.len().div_ceil(2);
    let lower = rows[..half].iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let upper = rows[half..].iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let bounded = upper <= lower * (1.0 + 1e-9);

    let slopes = if grid.len() >= 2 {
        classes
            .iter()
            .zip(&logs)
            .map(|(class, pts)| {
                let slope = least_squares_slope(pts);
                let expected = -(p as f64) - class.length() as f64;
                ClassSlope {
                    cycle_type: class.to_string(),
                    slope,
                    expected,
                    within_tolerance: (slope - expected).abs() <= SLOPE_TOLERANCE,
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(BoundReport { p, k, rows, envelope, bounded, slopes })
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
