use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{wg_cycle_type, WeingartenError};
use crate::symgroup::Permutation;

/// Largest `p` accepted by [`integrate_monomial`].
pub const MAX_MONOMIAL_DEGREE: usize = 6;

/// `∫ U_{i₁j₁}⋯U_{i_p j_p} Ū_{i′₁j′₁}⋯Ū_{i′_p j′_p} dU` over Haar `U(n)`.
///
/// Indices are 1-based. Sums `Wg(n, τσ⁻¹)` over all `σ, τ ∈ S_p` with
/// `i_k = i′_{σ(k)}` and `j_k = j′_{τ(k)}`.
pub fn integrate_monomial(
    n: u64,
    i: &[usize],
    j: &[usize],
    i_prime: &[usize],
    j_prime: &[usize],
) -> Result<BigRational, WeingartenError> {
    let p = i.len();
    if j.len() != p || i_prime.len() != p || j_prime.len() != p {
        return Err(WeingartenError::LengthMismatch([
            i.len(),
            j.len(),
            i_prime.len(),
            j_prime.len(),
        ]));
    }
    if p > MAX_MONOMIAL_DEGREE {
        return Err(WeingartenError::DegreeTooLarge {
            what: "integrate_monomial",
            p,
            max: MAX_MONOMIAL_DEGREE,
        });
    }
    if n == 0 {
        return Err(WeingartenError::ZeroDimension);
    }
    for &index in i.iter().chain(j).chain(i_prime).chain(j_prime) {
        if index == 0 || index as u64 > n {
            return Err(WeingartenError::IndexOutOfRange { index, n });
        }
    }

    let matching = |left: &[usize], right: &[usize]| -> Vec<Permutation> {
        Permutation::all(p)
            .filter(|s| (1..=p).all(|k| left[k - 1] == right[s.image(k) - 1]))
            .collect()
    };
    let sigmas = matching(i, i_prime);
    let taus = matching(j, j_prime);
    if sigmas.is_empty() || taus.is_empty() {
        return Ok(BigRational::zero());
    }

    let mut counts = HashMap::new();
    for sigma in &sigmas {
        let sigma_inv = sigma.inverse();
        for tau in &taus {
            *counts
                .entry(tau.compose_unchecked(&sigma_inv).cycle_type())
                .or_insert(0i64) += 1;
        }
    }
    let mut total = BigRational::zero();
    for (ct, count) in counts {
        total += wg_cycle_type(n, &ct)? * BigRational::from_integer(count.into());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn examples() {
        for n in 1..=8i64 {
            assert_eq!(integrate_monomial(n as u64, &[1], &[1], &[1], &[1]).unwrap(), rat(1, n));
        }
        assert!(integrate_monomial(4, &[1], &[1], &[2], &[2]).unwrap().is_zero());
        for n in 2..=8i64 {
            assert_eq!(
                integrate_monomial(n as u64, &[1, 1], &[1, 1], &[1, 1], &[1, 1]).unwrap(),
                rat(2, n * (n + 1))
            );
        }
    }

    #[test]
    fn rows_are_orthonormal() {
        for n in 1..=8u64 {
            for a in 1..=n as usize {
                for b in 1..=n as usize {
                    let s: BigRational = (1..=n as usize)
                        .map(|c| integrate_monomial(n, &[a], &[c], &[b], &[c]).unwrap())
                        .sum();
                    let expected = if a == b { 1 } else { 0 };
                    assert_eq!(s, rat(expected, 1));
                }
            }
        }
    }

    #[test]
    fn second_moment_mixed() {
        // E|U11|²|U22|² = 1/(n²−1) and E[U11 U22 Ū12 Ū21] = −1/(n(n²−1)).
        for n in 2..=7i64 {
            let m = n as u64;
            assert_eq!(
                integrate_monomial(m, &[1, 2], &[1, 2], &[1, 2], &[1, 2]).unwrap(),
                rat(1, n * n - 1)
            );
            assert_eq!(
                integrate_monomial(m, &[1, 2], &[1, 2], &[1, 2], &[2, 1]).unwrap(),
                rat(-1, n * (n * n - 1))
            );
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            integrate_monomial(3, &[1], &[1, 1], &[1], &[1]),
            Err(WeingartenError::LengthMismatch(_))
        ));
        assert!(matches!(
            integrate_monomial(3, &[4], &[1], &[1], &[1]),
            Err(WeingartenError::IndexOutOfRange { index: 4, n: 3 })
        ));
        let seven = [1; 7];
        assert!(integrate_monomial(8, &seven, &seven, &seven, &seven).is_err());
    }
}
