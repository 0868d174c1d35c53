use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{character, dimension, factorial, partitions, CycleType, Permutation, SymGroupError};

/// Largest degree enumerated element by element in [`character_check`].
pub const MAX_ORTHOGONALITY_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterReport {
    pub p: usize,
    /// `Σ_σ χ^λ(σ) χ^μ(σ) = p!·δ_{λμ}` for every pair, summing over all of `S_p`.
    pub orthogonality_ok: bool,
    /// `Σ_λ dim(λ)² = p!`.
    pub dimension_sum_ok: bool,
    pub failures: Vec<String>,
}

impl CharacterReport {
    pub fn passed(&self) -> bool {
        self.orthogonality_ok && self.dimension_sum_ok
    }
}

/// Exact first orthogonality relation and the dimension identity in `S_p`.
/// Orthogonality is skipped (reported true) above [`MAX_ORTHOGONALITY_DEGREE`].
pub fn character_check(p: usize) -> Result<CharacterReport, SymGroupError> {
    let lambdas = partitions(p)?;
    let order = factorial(p);
    let mut failures = Vec::new();

    let dim_sum: BigInt = lambdas.iter().map(|l| dimension(l).map(|d| &d * &d)).sum::<Result<_, _>>()?;
    let dimension_sum_ok = dim_sum == order;
    if !dimension_sum_ok {
        failures.push(format!("sum of dim^2 is {dim_sum}, expected {order}"));
    }

    let mut orthogonality_ok = true;
    if p <= MAX_ORTHOGONALITY_DEGREE {
        let mut class_sizes: BTreeMap<CycleType, u64> = BTreeMap::new();
        for sigma in Permutation::all(p) {
            *class_sizes.entry(sigma.cycle_type()).or_default() += 1;
        }
        let table: Vec<Vec<BigInt>> = lambdas
            .iter()
            .map(|l| class_sizes.keys().map(|mu| character(l, mu)).collect())
            .collect::<Result<_, _>>()?;
        let sizes: Vec<BigInt> = class_sizes.values().map(|&c| BigInt::from(c)).collect();
        for (a, row_a) in table.iter().enumerate() {
            for (b, row_b) in table.iter().enumerate() {
                let sum = row_a
                    .iter()
                    .zip(row_b)
                    .zip(&sizes)
                    .fold(BigInt::zero(), |acc, ((x, y), c)| acc + x * y * c);
                let expected = if a == b { order.clone() } else { BigInt::zero() };
                if sum != expected {
                    orthogonality_ok = false;
                    failures.push(format!("<{}, {}> = {sum}, expected {expected}", lambdas[a], lambdas[b]));
                }
            }
        }
    }
    Ok(CharacterReport { p, orthogonality_ok, dimension_sum_ok, failures })
}
