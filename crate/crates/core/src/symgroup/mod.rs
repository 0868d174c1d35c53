//! Exact combinatorics of the symmetric group.

mod characters;
mod checks;
mod gamma;
mod partition;
mod permutation;

use thiserror::Error;

pub use characters::{
    character, content_product, dimension, factorial, schur_dim, MAX_CHARACTER_DEGREE,
};
pub use checks::{character_check, CharacterReport, MAX_ORTHOGONALITY_DEGREE};
pub use gamma::{
    gamma_permutation, lemma_gamma_check, LemmaGammaReport, DEFAULT_SAMPLES, EXHAUSTIVE_LIMIT,
    MAX_GAMMA_N,
};
pub use partition::{partitions, Partition, MAX_PARTITION_DEGREE};
pub use permutation::{AllPermutations, CycleType, Permutation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymGroupError {
    #[error("{what}: degree {p} outside supported range (max {max})")]
    DegreeOutOfRange { what: &'static str, p: usize, max: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("not a partition: {0:?}")]
    InvalidPartition(Vec<usize>),
    #[error("not a bijection: {0:?}")]
    NotABijection(Vec<usize>),
    #[error("parse error: {0}")]
    Parse(String),
}
