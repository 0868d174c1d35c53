use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Partition, SymGroupError};

/// A permutation of `{1, ..., p}`.
///
/// Points are 1-indexed at the public surface so that cycle strings read the
/// same as they are written by hand; storage is 0-indexed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

/// Cycle lengths of a permutation, fixed points included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleType(pub Partition);

impl CycleType {
    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    /// `#σ`.
    pub fn num_cycles(&self) -> usize {
        self.0.len()
    }

    /// `|σ| = p − #σ`.
    pub fn length(&self) -> usize {
        self.degree() - self.num_cycles()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for CycleType {
    type Err = SymGroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(CycleType)
    }
}

impl Permutation {
    pub fn identity(p: usize) -> Self {
        Self { images: (0..p).collect() }
    }

    /// Builds from 1-indexed images: `images[k-1] = σ(k)`.
    pub fn from_images(images: &[usize]) -> Result<Self, SymGroupError> {
        let p = images.len();
        let mut seen = vec![false; p];
        let mut zero_based = Vec::with_capacity(p);
        for &x in images {
            if x == 0 || x > p || seen[x - 1] {
                return Err(SymGroupError::NotABijection(images.to_vec()));
            }
            seen[x - 1] = true;
            zero_based.push(x - 1);
        }
        Ok(Self { images: zero_based })
    }

    pub(crate) fn from_zero_based(images: Vec<usize>) -> Self {
        Self { images }
    }

    /// Builds a permutation of degree `p` from disjoint cycles of 1-indexed
    /// points.
    pub fn from_cycles(p: usize, cycles: &[Vec<usize>]) -> Result<Self, SymGroupError> {
        let mut images: Vec<usize> = (0..p).collect();
        let mut used = vec![false; p];
        for cycle in cycles {
            for &x in cycle {
                if x == 0 || x > p {
                    return Err(SymGroupError::Parse(format!("point {x} outside 1..={p}")));
                }
                if used[x - 1] {
                    return Err(SymGroupError::Parse(format!("point {x} repeated")));
                }
                used[x - 1] = true;
            }
            for (k, &x) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                images[x - 1] = next - 1;
            }
        }
        Ok(Self { images })
    }

    /// Parses cycle notation such as `"(1 2 3)(4 5)"`; `"()"` is the identity.
    /// The degree is `p` if given, otherwise the largest point mentioned.
    pub fn parse_cycles(s: &str, p: Option<usize>) -> Result<Self, SymGroupError> {
        let cycles = parse_cycle_list(s)?;
        let max_point = cycles.iter().flatten().copied().max().unwrap_or(0);
        let degree = match p {
            Some(p) if p < max_point => {
                return Err(SymGroupError::Parse(format!(
                    "point {max_point} exceeds degree {p}"
                )))
            }
            Some(p) => p,
            None => max_point,
        };
        Self::from_cycles(degree, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// `σ(k)` for 1-indexed `k`.
    pub fn image(&self, k: usize) -> usize {
        self.images[k - 1] + 1
    }

    /// 1-indexed images.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(σ ∘ τ)(i) = σ(τ(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self, SymGroupError> {
        if self.degree() != other.degree() {
            return Err(SymGroupError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Self) -> Self {
        Self {
            images: other.images.iter().map(|&t| self.images[t]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Self { images: inv }
    }

    /// Disjoint cycles (1-indexed), each starting at its smallest point,
    /// fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let p = self.degree();
        let mut seen = vec![false; p];
        let mut out = Vec::new();
        for start in 0..p {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        let p = self.degree();
        let mut seen = vec![false; p];
        let mut count = 0;
        for start in 0..p {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x];
            }
        }
        count
    }

    /// `|σ|`, the minimal number of transpositions.
    pub fn length(&self) -> usize {
        self.degree() - self.num_cycles()
    }

    pub fn cycle_type(&self) -> CycleType {
        let lengths = self.cycles().iter().map(Vec::len).collect();
        CycleType(Partition::new(lengths).expect("cycle lengths are positive"))
    }

    /// Permutation with the same points fixed above `self.degree()`.
    pub fn extend(&self, p: usize) -> Self {
        assert!(p >= self.degree());
        let mut images = self.images.clone();
        images.extend(self.degree()..p);
        Self { images }
    }

    /// A canonical representative of the conjugacy class `μ`: consecutive
    /// runs of points in the order of the parts.
    pub fn of_cycle_type(mu: &Partition) -> Self {
        let mut images = Vec::with_capacity(mu.degree());
        let mut base = 0;
        for &len in mu.parts() {
            for k in 0..len {
                images.push(base + (k + 1) % len);
            }
            base += len;
        }
        Self { images }
    }

    /// Uniform random permutation (Fisher–Yates).
    pub fn random<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..p).collect();
        for i in (1..p).rev() {
            let j = rng.random_range(0..=i);
            images.swap(i, j);
        }
        Self { images }
    }

    /// Advances to the next permutation in lexicographic order of images;
    /// returns `false` after the last one.
    pub fn next_lexicographic(&mut self) -> bool {
        next_permutation(&mut self.images)
    }

    /// Every element of `S_p`, lexicographically.
    pub fn all(p: usize) -> AllPermutations {
        AllPermutations {
            current: Some((0..p).collect()),
        }
    }

    /// Packs a permutation of degree ≤ 16 into a `u64`, 4 bits per point.
    pub fn pack(&self) -> u64 {
        assert!(self.degree() <= 16);
        self.images
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &x)| acc | ((x as u64) << (4 * i)))
    }
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub struct AllPermutations {
    current: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        if next_permutation(&mut next) {
            self.current = Some(next);
        }
        Some(Permutation::from_zero_based(cur))
    }
}

fn parse_cycle_list(s: &str) -> Result<Vec<Vec<usize>>, SymGroupError> {
    let mut cycles = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return Err(SymGroupError::Parse(format!("expected '(' in {s:?}")));
        };
        let close = body
            .find(')')
            .ok_or_else(|| SymGroupError::Parse(format!("unclosed cycle in {s:?}")))?;
        let points = body[..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| SymGroupError::Parse(format!("bad point {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !points.is_empty() {
            cycles.push(points);
        }
        rest = body[close + 1..].trim_start();
    }
    Ok(cycles)
}

impl fmt::Display for Permutation {
    /// Cycle notation without fixed points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            f.write_str("(")?;
            for (k, x) in cycle.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = SymGroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_cycles(s, None)
    }
}
