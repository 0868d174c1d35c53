//! The boundary-wiring permutation `γ ∈ S_{2n+4}` and a brute-force checker
//! for the parity and injectivity properties the purity bound relies on.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{Permutation, SymGroupError};

/// Above this many `(α, β)` pairs the checker switches to random sampling.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

/// Default number of random pairs when enumeration is too large.
pub const DEFAULT_SAMPLES: u64 = 10_000;

/// Largest `n` the checker accepts (`2n + 4 ≤ 16` so permutations pack into
/// 64 bits).
pub const MAX_GAMMA_N: usize = 6;

/// `γ = (2n+1, 1, 2, ..., n, 2n+3)(2n+2, n+1, n+2, ..., 2n, 2n+4)`.
pub fn gamma_permutation(n: usize) -> Result<Permutation, SymGroupError> {
    if n == 0 {
        return Err(SymGroupError::Parse("gamma requires n >= 1".into()));
    }
    let first: Vec<usize> = std::iter::once(2 * n + 1)
        .chain(1..=n)
        .chain(std::iter::once(2 * n + 3))
        .collect();
    let second: Vec<usize> = std::iter::once(2 * n + 2)
        .chain(n + 1..=2 * n)
        .chain(std::iter::once(2 * n + 4))
        .collect();
    Permutation::from_cycles(2 * n + 4, &[first, second])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaGammaReport {
    pub n: usize,
    pub exhaustive: bool,
    pub pairs_checked: u64,
    /// `|γ⁻¹αγα⁻¹β| + |β|` even for every tested pair.
    pub parity_ok: bool,
    /// `(α, β) ↦ (γ⁻¹αγα⁻¹, βα⁻¹)` never sent two tested pairs to one image.
    pub injective_ok: bool,
    pub counterexamples: Vec<String>,
}

impl LemmaGammaReport {
    pub fn passed(&self) -> bool {
        self.parity_ok && self.injective_ok && self.counterexamples.is_empty()
    }
}

const MAX_COUNTEREXAMPLES: usize = 16;

/// Checks the parity and injectivity properties for `α` fixing
/// `2n+1, ..., 2n+4` and arbitrary `β ∈ S_{2n+4}`.
///
/// The search space has `(2n)!·(2n+4)!` pairs; it is enumerated when that is
/// below [`EXHAUSTIVE_LIMIT`] (n ≤ 2), otherwise `samples` pairs are drawn
/// from a ChaCha stream seeded with `seed`.
pub fn lemma_gamma_check(n: usize, samples: u64, seed: u64) -> Result<LemmaGammaReport, SymGroupError> {
    if !(1..=MAX_GAMMA_N).contains(&n) {
        return Err(SymGroupError::DegreeOutOfRange {
            what: "lemma_gamma_check",
            p: n,
            max: MAX_GAMMA_N,
        });
    }
    let p = 2 * n + 4;
    let gamma = gamma_permutation(n)?;
    let gamma_inv = gamma.inverse();
    let space = factorial_u64(2 * n).saturating_mul(factorial_u64(p));
    let exhaustive = space < EXHAUSTIVE_LIMIT;

    let mut checker = Checker {
        gamma_inv: &gamma_inv,
        gamma: &gamma,
        images: HashMap::new(),
        parity_ok: true,
        injective_ok: true,
        counterexamples: Vec::new(),
        checked: 0,
    };

    if exhaustive {
        for alpha_small in Permutation::all(2 * n) {
            let alpha = alpha_small.extend(p);
            for beta in Permutation::all(p) {
                checker.visit(&alpha, &beta);
            }
        }
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let alpha = Permutation::random(2 * n, &mut rng).extend(p);
            let beta = Permutation::random(p, &mut rng);
            checker.visit(&alpha, &beta);
        }
    }

    Ok(LemmaGammaReport {
        n,
        exhaustive,
        pairs_checked: checker.checked,
        parity_ok: checker.parity_ok,
        injective_ok: checker.injective_ok,
        counterexamples: checker.counterexamples,
    })
}

struct Checker<'a> {
    gamma: &'a Permutation,
    gamma_inv: &'a Permutation,
    images: HashMap<u128, u128>,
    parity_ok: bool,
    injective_ok: bool,
    counterexamples: Vec<String>,
    checked: u64,
}

impl Checker<'_> {
    fn visit(&mut self, alpha: &Permutation, beta: &Permutation) {
        self.checked += 1;
        let alpha_inv = alpha.inverse();
        let g = self
            .gamma_inv
            .compose_unchecked(alpha)
            .compose_unchecked(self.gamma)
            .compose_unchecked(&alpha_inv);
        let c = g.compose_unchecked(beta);
        if !(c.length() + beta.length()).is_multiple_of(2) {
            self.parity_ok = false;
            self.note(format!("parity: alpha={alpha} beta={beta}"));
        }
        let h = beta.compose_unchecked(&alpha_inv);
        let key = ((g.pack() as u128) << 64) | h.pack() as u128;
        let pre = ((alpha.pack() as u128) << 64) | beta.pack() as u128;
        if let Some(&other) = self.images.get(&key) {
            if other != pre {
                self.injective_ok = false;
                self.note(format!("collision: alpha={alpha} beta={beta} g={g} h={h}"));
            }
        } else {
            self.images.insert(key, pre);
        }
    }

    fn note(&mut self, msg: String) {
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(msg);
        }
    }
}

fn factorial_u64(k: usize) -> u64 {
    (1..=k as u64).fold(1u64, |acc, x| acc.saturating_mul(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        let g1 = gamma_permutation(1).unwrap();
        assert_eq!(g1, Permutation::parse_cycles("(3 1 5)(4 2 6)", Some(6)).unwrap());
        let g2 = gamma_permutation(2).unwrap();
        assert_eq!(g2, Permutation::parse_cycles("(5 1 2 7)(6 3 4 8)", Some(8)).unwrap());
        for n in 1..=8 {
            let g = gamma_permutation(n).unwrap();
            assert_eq!(g.num_cycles(), 2);
            assert!(g.cycles().iter().all(|c| c.len() == n + 2));
        }
        assert!(gamma_permutation(0).is_err());
    }

    #[test]
    fn identity_pair_is_even() {
        let g = gamma_permutation(1).unwrap();
        let id = Permutation::identity(6);
        let c = g.inverse().compose_unchecked(&id).compose_unchecked(&g);
        assert_eq!(c.length() + id.length(), 0);
    }

    #[test]
    fn exhaustive_n1() {
        let report = lemma_gamma_check(1, DEFAULT_SAMPLES, 0).unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.pairs_checked, 2 * 720);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn sampled_n3() {
        let report = lemma_gamma_check(3, DEFAULT_SAMPLES, 17).unwrap();
        assert!(!report.exhaustive);
        assert_eq!(report.pairs_checked, DEFAULT_SAMPLES);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn only_trivial_alpha_commutes_with_gamma() {
        // γ⁻¹αγα⁻¹ = 1 forces α = 1 among permutations fixing 2n+1..2n+4.
        for n in 1..=3 {
            let g = gamma_permutation(n).unwrap();
            let p = 2 * n + 4;
            let nontrivial = Permutation::all(2 * n)
                .map(|a| a.extend(p))
                .filter(|a| !a.is_identity())
                .filter(|a| {
                    g.inverse()
                        .compose_unchecked(a)
                        .compose_unchecked(&g)
                        .compose_unchecked(&a.inverse())
                        .is_identity()
                })
                .count();
            assert_eq!(nontrivial, 0, "n={n}");
        }
    }

    #[test]
    fn rejects_large_n() {
        assert!(lemma_gamma_check(0, 10, 0).is_err());
        assert!(lemma_gamma_check(7, 10, 0).is_err());
    }
}
