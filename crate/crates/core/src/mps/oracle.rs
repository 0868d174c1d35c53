//! Brute-force reference: the full `d^n`-dimensional state built from the
//! spectral decompositions of `L` and `R`, then partially traced.

use serde::{Deserialize, Serialize};

use super::{DensityMatrix, MpsError};
use crate::ensembles::{stream_rng, EnsembleParams, MpsSample, OmegaDist};
use crate::linalg::{CMatrix, C64};

/// Largest `d^n` the dense construction accepts.
pub const MAX_DENSE_DIM: usize = 1024;

/// Full unnormalized state on `n` sites,
/// `Σ_{a,b} λ_a ω_b |ψ_ab⟩⟨ψ_ab|` with `ψ_ab(i) = v_a† A_{i_1}⋯A_{i_n} w_b`.
pub fn dense_state(sample: &MpsSample, n: usize) -> Result<CMatrix, MpsError> {
    let d = sample.d;
    let full = u32::try_from(n)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .filter(|&x| x <= MAX_DENSE_DIM)
        .ok_or_else(|| MpsError::InvalidWindow(format!("d^n too large for the dense oracle (n={n})")))?;
    let dim = sample.bond_dim;
    let mut rho = CMatrix::zeros(full, full);
    for a in 0..dim {
        // Row vectors v_a† A_{i_1} ⋯ A_{i_k}, expanded breadth-first so the
        // final list is ordered by the string with site 1 most significant.
        let mut rows: Vec<Vec<C64>> = vec![(0..dim).map(|k| sample.v[(k, a)].conj()).collect()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(rows.len() * d);
            for row in &rows {
                for tensor in &sample.a {
                    next.push(
                        (0..dim)
                            .map(|c| (0..dim).map(|k| row[k] * tensor[(k, c)]).sum())
                            .collect(),
                    );
                }
            }
            rows = next;
        }
        for b in 0..dim {
            let weight = sample.lambda[a] * sample.omega[b];
            let psi: Vec<C64> = rows
                .iter()
                .map(|row| (0..dim).map(|k| row[k] * sample.w[(k, b)]).sum())
                .collect();
            for i in 0..full {
                for j in 0..full {
                    rho[(i, j)] += psi[i] * psi[j].conj() * weight;
                }
            }
        }
    }
    Ok(rho)
}

/// Traces out every site except `t_left + 1 ..= t_left + l`.
pub fn partial_trace(rho: &CMatrix, d: usize, n: usize, t_left: usize, l: usize) -> CMatrix {
    assert!(t_left + l <= n);
    let right = d.pow((n - t_left - l) as u32);
    let window = d.pow(l as u32);
    let left = d.pow(t_left as u32);
    let mut out = CMatrix::zeros(window, window);
    for i in 0..window {
        for j in 0..window {
            let mut acc = C64::new(0.0, 0.0);
            for x in 0..left {
                for y in 0..right {
                    let row = (x * window + i) * right + y;
                    let col = (x * window + j) * right + y;
                    acc += rho[(row, col)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Traces out the last of the sites of a `d^m`-dimensional matrix.
pub fn trace_last_site(rho: &CMatrix, d: usize) -> CMatrix {
    let dim = rho.nrows() / d;
    CMatrix::from_fn(dim, dim, |i, j| (0..d).map(|k| rho[(i * d + k, j * d + k)]).sum())
}

/// Reduced density of sites `t_left + 1 ..= t_left + l` from the dense state.
pub fn dense_reduced_density(sample: &MpsSample, n: usize, t_left: usize, l: usize) -> Result<DensityMatrix, MpsError> {
    if l == 0 || t_left + l > n {
        return Err(MpsError::InvalidWindow(format!("sites {}..={} of {n}", t_left + 1, t_left + l)));
    }
    let full = dense_state(sample, n)?;
    Ok(DensityMatrix::new(partial_trace(&full, sample.d, n, t_left, l), false))
}

/// Largest entrywise gap between the engine and the dense oracle over every
/// window of an `n`-site chain.
pub fn max_oracle_gap(sample: &MpsSample, n: usize) -> Result<f64, MpsError> {
    let full = dense_state(sample, n)?;
    let mut worst = 0.0f64;
    for t_left in 0..n {
        for l in 1..=n - t_left {
            let reference = partial_trace(&full, sample.d, n, t_left, l);
            let engine = super::reduced_density_window(sample, n, t_left, l)?;
            worst = worst.max(crate::linalg::max_abs(&(reference - engine.entries)));
        }
    }
    Ok(worst)
}

/// Entrywise agreement tolerance used by [`oracle_sweep`].
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub d: usize,
    pub bond_dims: Vec<usize>,
    pub chain_lengths: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub max_gap: f64,
    pub passed: bool,
}

/// Compares engine and dense oracle on `instances` random samples, cycling
/// through every `(D, n)` combination and checking all windows of each.
pub fn oracle_sweep(
    d: usize,
    bond_dims: &[usize],
    chain_lengths: &[usize],
    instances: usize,
    seed: u64,
) -> Result<OracleReport, MpsError> {
    let combos: Vec<(usize, usize)> =
        bond_dims.iter().flat_map(|&b| chain_lengths.iter().map(move |&n| (b, n))).collect();
    if combos.is_empty() {
        return Err(MpsError::InvalidWindow("empty D or n grid".into()));
    }
    let mut max_gap = 0.0f64;
    for k in 0..instances {
        let (bond_dim, n) = combos[k % combos.len()];
        let params = EnsembleParams::new(d, bond_dim, n, n, seed)?;
        let sample = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(seed, k as u64));
        max_gap = max_gap.max(max_oracle_gap(&sample, n)?);
    }
    Ok(OracleReport {
        d,
        bond_dims: bond_dims.to_vec(),
        chain_lengths: chain_lengths.to_vec(),
        instances,
        seed,
        max_gap,
        passed: max_gap <= ORACLE_TOLERANCE,
    })
}
