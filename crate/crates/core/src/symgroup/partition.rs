use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SymGroupError;

/// Largest degree for which [`partitions`] enumerates.
pub const MAX_PARTITION_DEGREE: usize = 30;

/// An integer partition `λ ⊢ p`, stored as non-increasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from parts in any order; zeros are rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self, SymGroupError> {
        if parts.contains(&0) {
            return Err(SymGroupError::InvalidPartition(parts));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub(crate) fn from_sorted(parts: Vec<usize>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&x| x > 0));
        Self { parts }
    }

    /// The one-row partition `(p)`.
    pub fn row(p: usize) -> Self {
        if p == 0 {
            Self { parts: vec![] }
        } else {
            Self { parts: vec![p] }
        }
    }

    /// The one-column partition `(1, ..., 1)`.
    pub fn column(p: usize) -> Self {
        Self { parts: vec![1; p] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The degree `p = Σ λ_i`.
    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows of the Young diagram.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Cells `(row, col)` of the Young diagram, 0-indexed.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (0..len).map(move |j| (i, j)))
    }

    /// Transposed diagram.
    pub fn conjugate(&self) -> Self {
        let width = self.parts.first().copied().unwrap_or(0);
        let parts = (0..width)
            .map(|j| self.parts.iter().take_while(|&&len| len > j).count())
            .collect();
        Self { parts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for part in &self.parts {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{part}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = SymGroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self { parts: vec![] });
        }
        let parts = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| SymGroupError::Parse(format!("bad partition part {tok:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parts)
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = SymGroupError;

    fn try_from(parts: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

/// All partitions of `p` in lexicographically descending order.
pub fn partitions(p: usize) -> Result<Vec<Partition>, SymGroupError> {
    if !(1..=MAX_PARTITION_DEGREE).contains(&p) {
        return Err(SymGroupError::DegreeOutOfRange {
            what: "partitions",
            p,
            max: MAX_PARTITION_DEGREE,
        });
    }
    Ok(partitions_unchecked(p))
}

fn partitions_unchecked(p: usize) -> Vec<Partition> {
    fn go(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::from_sorted(prefix.clone()));
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            go(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(p, p, &mut Vec::with_capacity(p), &mut out);
    out
}
