//! Irreducible characters of `S_p`, their degrees, and principal
//! specializations of Schur polynomials. All arithmetic is exact.

use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{CycleType, Partition, SymGroupError};

/// Largest degree accepted by [`character`] and [`dimension`].
pub const MAX_CHARACTER_DEGREE: usize = 14;

type MemoKey = (Vec<usize>, Vec<usize>);

static CHARACTER_MEMO: LazyLock<RwLock<HashMap<MemoKey, BigInt>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// `χ^λ(σ)` for any `σ` of cycle type `μ`, by the Murnaghan–Nakayama rule.
pub fn character(lambda: &Partition, mu: &CycleType) -> Result<BigInt, SymGroupError> {
    let p = lambda.degree();
    if p != mu.degree() {
        return Err(SymGroupError::DegreeMismatch(p, mu.degree()));
    }
    if p > MAX_CHARACTER_DEGREE {
        return Err(SymGroupError::DegreeOutOfRange {
            what: "character",
            p,
            max: MAX_CHARACTER_DEGREE,
        });
    }
    Ok(mn_recursive(lambda.parts(), mu.partition().parts()))
}

fn mn_recursive(lambda: &[usize], mu: &[usize]) -> BigInt {
    if mu.is_empty() {
        return if lambda.is_empty() { BigInt::one() } else { BigInt::zero() };
    }
    let key = (lambda.to_vec(), mu.to_vec());
    if let Some(v) = CHARACTER_MEMO.read().expect("memo lock").get(&key) {
        return v.clone();
    }
    let r = mu[0];
    let rest = &mu[1..];
    let mut total = BigInt::zero();
    for (shape, sign) in remove_rim_hooks(lambda, r) {
        let term = mn_recursive(&shape, rest);
        if sign {
            total -= term;
        } else {
            total += term;
        }
    }
    CHARACTER_MEMO
        .write()
        .expect("memo lock")
        .insert(key, total.clone());
    total
}

/// Every shape obtained by deleting a border strip of size `r`, paired with
/// `true` when the strip has odd height (negative sign).
fn remove_rim_hooks(lambda: &[usize], r: usize) -> Vec<(Vec<usize>, bool)> {
    let k = lambda.len();
    // β-numbers: λ_i + (k − 1 − i), strictly decreasing.
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &x)| x + (k - 1 - i)).collect();
    let mut out = Vec::new();
    for (idx, &b) in beta.iter().enumerate() {
        if b < r {
            continue;
        }
        let target = b - r;
        if beta.contains(&target) {
            continue;
        }
        let crossed = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut next = beta.clone();
        next[idx] = target;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<usize> = next
            .iter()
            .enumerate()
            .map(|(i, &x)| x - (k - 1 - i))
            .filter(|&x| x > 0)
            .collect();
        out.push((shape, crossed % 2 == 1));
    }
    out
}

/// `χ^λ(1)`, by the hook-length formula.
pub fn dimension(lambda: &Partition) -> Result<BigInt, SymGroupError> {
    let p = lambda.degree();
    if p > MAX_CHARACTER_DEGREE {
        return Err(SymGroupError::DegreeOutOfRange {
            what: "dimension",
            p,
            max: MAX_CHARACTER_DEGREE,
        });
    }
    Ok(hook_length_dimension(lambda))
}

pub(crate) fn hook_length_dimension(lambda: &Partition) -> BigInt {
    let conj = lambda.conjugate();
    let hooks = lambda.cells().fold(BigInt::one(), |acc, (i, j)| {
        let arm = lambda.parts()[i] - j - 1;
        let leg = conj.parts()[j] - i - 1;
        acc * BigInt::from(arm + leg + 1)
    });
    factorial(lambda.degree()) / hooks
}

/// `∏_{cells (i,j)} (n + j − i)`.
pub fn content_product(lambda: &Partition, n: u64) -> BigInt {
    lambda.cells().fold(BigInt::one(), |acc, (i, j)| {
        acc * (BigInt::from(n) + BigInt::from(j) - BigInt::from(i))
    })
}

/// `s_{λ,n}(1, ..., 1)`: the Schur polynomial in `n` variables at all ones.
pub fn schur_dim(lambda: &Partition, n: u64) -> BigRational {
    let p = lambda.degree();
    let dim = hook_length_dimension(lambda);
    BigRational::new(dim * content_product(lambda, n), factorial(p))
}

pub fn factorial(p: usize) -> BigInt {
    (1..=p).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symgroup::partitions;

    fn ct(s: &str) -> CycleType {
        s.parse().unwrap()
    }

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn trivial_and_sign() {
        for p in 1..=7 {
            for mu in partitions(p).unwrap() {
                let mu = CycleType(mu);
                assert_eq!(character(&Partition::row(p), &mu).unwrap(), BigInt::one());
                let sign = if mu.length().is_multiple_of(2) { 1 } else { -1 };
                assert_eq!(
                    character(&Partition::column(p), &mu).unwrap(),
                    BigInt::from(sign)
                );
            }
        }
    }

    #[test]
    fn s3_table() {
        assert_eq!(character(&part("2,1"), &ct("3")).unwrap(), BigInt::from(-1));
        assert_eq!(character(&part("2,1"), &ct("2,1")).unwrap(), BigInt::zero());
        assert_eq!(character(&part("2,1"), &ct("1,1,1")).unwrap(), BigInt::from(2));
    }

    #[test]
    fn column_orthogonality_s3() {
        // Class sizes of S_3: id 1, transpositions 3, 3-cycles 2.
        let classes = [("1,1,1", 1), ("2,1", 3), ("3", 2)];
        let lambdas = partitions(3).unwrap();
        for (mu, size) in classes {
            let sum: BigInt = lambdas
                .iter()
                .map(|l| {
                    let c = character(l, &ct(mu)).unwrap();
                    &c * &c
                })
                .sum();
            assert_eq!(sum, BigInt::from(6 / size));
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(&Partition::row(6)).unwrap(), BigInt::one());
        assert_eq!(dimension(&Partition::column(6)).unwrap(), BigInt::one());
        assert_eq!(dimension(&part("2,1")).unwrap(), BigInt::from(2));
        for lam in partitions(8).unwrap() {
            let id = CycleType(Partition::column(8));
            assert_eq!(dimension(&lam).unwrap(), character(&lam, &id).unwrap());
        }
        assert!(dimension(&Partition::row(15)).is_err());
    }

    #[test]
    fn guards() {
        assert!(character(&part("2,1"), &ct("2")).is_err());
        assert!(character(&Partition::row(15), &CycleType(Partition::row(15))).is_err());
    }

    // Count semistandard tableaux of shape λ with entries ≤ n by brute force.
    fn count_ssyt(lambda: &Partition, n: u64) -> u64 {
        let cells: Vec<(usize, usize)> = lambda.cells().collect();
        let mut fill = vec![0u64; cells.len()];
        fn go(k: usize, cells: &[(usize, usize)], fill: &mut [u64], n: u64) -> u64 {
            if k == cells.len() {
                return 1;
            }
            let (i, j) = cells[k];
            let mut lo = 1;
            if j > 0 {
                let left = cells.iter().position(|&c| c == (i, j - 1)).unwrap();
                lo = lo.max(fill[left]);
            }
            if i > 0 {
                let up = cells.iter().position(|&c| c == (i - 1, j)).unwrap();
                lo = lo.max(fill[up] + 1);
            }
            let mut total = 0;
            for v in lo..=n {
                fill[k] = v;
                total += go(k + 1, cells, fill, n);
            }
            total
        }
        go(0, &cells, &mut fill, n)
    }

    #[test]
    fn schur_dim_examples() {
        for n in 1..=9u64 {
            assert_eq!(schur_dim(&Partition::row(1), n), BigRational::from_integer(n.into()));
            assert_eq!(
                schur_dim(&Partition::row(2), n),
                BigRational::from_integer((n * (n + 1) / 2).into())
            );
            assert_eq!(
                schur_dim(&Partition::column(2), n),
                BigRational::from_integer((n * (n - 1) / 2).into())
            );
        }
    }

    #[test]
    fn schur_dim_matches_tableau_count() {
        for p in 1..=5 {
            for lam in partitions(p).unwrap() {
                for n in 1..=4u64 {
                    let expected = BigRational::from_integer(count_ssyt(&lam, n).into());
                    let got = schur_dim(&lam, n);
                    assert_eq!(got, expected, "λ={lam} n={n}");
                    assert_eq!(got.is_zero(), lam.len() as u64 > n);
                }
            }
        }
    }

    #[test]
    fn schur_dim_content_identity() {
        for p in 1..=8 {
            for lam in partitions(p).unwrap() {
                let dim = dimension(&lam).unwrap();
                for n in 1..=12u64 {
                    let lhs = schur_dim(&lam, n) * BigRational::from_integer(factorial(p))
                        / BigRational::from_integer(dim.clone());
                    assert_eq!(lhs, BigRational::from_integer(content_product(&lam, n)));
                }
            }
        }
    }
}
