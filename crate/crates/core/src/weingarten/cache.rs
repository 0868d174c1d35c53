use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::WeingartenError;
use crate::symgroup::{
    character, dimension, factorial, partitions, schur_dim, CycleType, Partition, Permutation,
};

/// Largest `p` for which [`wg`] is evaluated.
pub const MAX_WG_DEGREE: usize = 10;

/// `Wg(n, σ)`. Depends on `σ` only through its cycle type.
pub fn wg(n: u64, sigma: &Permutation) -> Result<BigRational, WeingartenError> {
    WeingartenCache::global().get(n, &sigma.cycle_type())
}

/// `Wg(n, σ)` for any `σ` of cycle type `mu`.
pub fn wg_cycle_type(n: u64, mu: &CycleType) -> Result<BigRational, WeingartenError> {
    WeingartenCache::global().get(n, mu)
}

fn compute(n: u64, mu: &CycleType) -> Result<BigRational, WeingartenError> {
    let p = mu.degree();
    if n == 0 {
        return Err(WeingartenError::ZeroDimension);
    }
    if p > MAX_WG_DEGREE {
        return Err(WeingartenError::DegreeTooLarge { what: "wg", p, max: MAX_WG_DEGREE });
    }
    if p == 0 {
        return Ok(BigRational::one());
    }
    if n < p as u64 {
        return Err(WeingartenError::SingularDimension { n, p });
    }
    let mut total = BigRational::zero();
    for lambda in partitions(p)? {
        let dim = dimension(&lambda)?;
        let chi = character(&lambda, mu)?;
        let s = schur_dim(&lambda, n);
        total += BigRational::from_integer(&dim * &dim * chi) / s;
    }
    let pf = factorial(p);
    Ok(total / BigRational::from_integer(&pf * &pf))
}

/// Memo of exact Weingarten values keyed by `(n, cycle type)`.
///
/// Reads are concurrent; inserts take a write lock. Values are pure functions
/// of the key, so races only duplicate work.
#[derive(Default)]
pub struct WeingartenCache {
    table: RwLock<HashMap<(u64, CycleType), BigRational>>,
}

static GLOBAL: LazyLock<WeingartenCache> = LazyLock::new(WeingartenCache::default);

impl WeingartenCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache used by [`wg`].
    pub fn global() -> &'static Self {
        &GLOBAL
    }

    pub fn get(&self, n: u64, mu: &CycleType) -> Result<BigRational, WeingartenError> {
        let key = (n, mu.clone());
        if let Some(v) = self.table.read().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let value = compute(n, mu)?;
        self.table
            .write()
            .expect("cache lock")
            .insert(key, value.clone());
        Ok(value)
    }

    pub fn insert(&self, record: CacheRecord) {
        self.table
            .write()
            .expect("cache lock")
            .insert((record.n, record.cycle_type), record.value);
    }

    /// Copies every entry of `other` into `self`.
    pub fn merge(&self, other: &WeingartenCache) {
        for record in other.records() {
            self.insert(record);
        }
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries sorted by `(p, cycle type, n)`.
    pub fn records(&self) -> Vec<CacheRecord> {
        let mut out: Vec<CacheRecord> = self
            .table
            .read()
            .expect("cache lock")
            .iter()
            .map(|((n, ct), v)| CacheRecord { n: *n, cycle_type: ct.clone(), value: v.clone() })
            .collect();
        out.sort_by(|a, b| {
            (a.cycle_type.degree(), &a.cycle_type, a.n).cmp(&(
                b.cycle_type.degree(),
                &b.cycle_type,
                b.n,
            ))
        });
        out
    }
}

impl PartialEq for WeingartenCache {
    fn eq(&self, other: &Self) -> bool {
        self.records() == other.records()
    }
}

impl fmt::Debug for WeingartenCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeingartenCache").field("len", &self.len()).finish()
    }
}

/// One cache line: `p;cycle_type;n;numerator/denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheRecord {
    pub n: u64,
    pub cycle_type: CycleType,
    pub value: BigRational,
}

impl fmt::Display for CacheRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{};{};{};{}/{}",
            self.cycle_type.degree(),
            self.cycle_type,
            self.n,
            self.value.numer(),
            self.value.denom()
        )
    }
}

impl FromStr for CacheRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.trim().split(';').collect();
        let [p, ct, n, value] = fields[..] else {
            return Err(format!("expected 4 ';'-separated fields, found {}", fields.len()));
        };
        let p: usize = p.parse().map_err(|_| format!("bad degree {p:?}"))?;
        let partition: Partition = ct.parse().map_err(|e| format!("{e}"))?;
        if partition.degree() != p {
            return Err(format!("cycle type {ct} does not have degree {p}"));
        }
        let n: u64 = n.parse().map_err(|_| format!("bad dimension {n:?}"))?;
        let (num, den) = value
            .split_once('/')
            .ok_or_else(|| format!("value {value:?} is not numerator/denominator"))?;
        let num: BigInt = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
        let den: BigInt = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Self { n, cycle_type: CycleType(partition), value: BigRational::new(num, den) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(s: &str, p: usize) -> Permutation {
        Permutation::parse_cycles(s, Some(p)).unwrap()
    }

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn low_degree_closed_forms() {
        for n in 1..=12i64 {
            assert_eq!(wg(n as u64, &Permutation::identity(1)).unwrap(), rat(1, n));
        }
        for n in 2..=12i64 {
            assert_eq!(wg(n as u64, &Permutation::identity(2)).unwrap(), rat(1, n * n - 1));
            assert_eq!(wg(n as u64, &perm("(1 2)", 2)).unwrap(), rat(-1, n * (n * n - 1)));
        }
        // Degree three, from the standard table.
        for n in 3..=12i64 {
            let common = n * (n * n - 1) * (n * n - 4);
            assert_eq!(wg(n as u64, &Permutation::identity(3)).unwrap(), rat(n * n - 2, common));
            assert_eq!(wg(n as u64, &perm("(1 2)", 3)).unwrap(), rat(-1, (n * n - 1) * (n * n - 4)));
            assert_eq!(wg(n as u64, &perm("(1 2 3)", 3)).unwrap(), rat(2, common));
        }
    }

    #[test]
    fn singular_and_guards() {
        assert!(matches!(
            wg(1, &Permutation::identity(2)),
            Err(WeingartenError::SingularDimension { n: 1, p: 2 })
        ));
        assert!(matches!(
            wg(20, &Permutation::identity(11)),
            Err(WeingartenError::DegreeTooLarge { .. })
        ));
        assert!(wg(0, &Permutation::identity(1)).is_err());
        assert_eq!(wg(3, &Permutation::identity(0)).unwrap(), BigRational::one());
    }

    #[test]
    fn record_round_trip_and_errors() {
        let rec = CacheRecord {
            n: 8,
            cycle_type: "2".parse().unwrap(),
            value: rat(-1, 504),
        };
        assert_eq!(rec.to_string(), "2;2;8;-1/504");
        assert_eq!(rec.to_string().parse::<CacheRecord>().unwrap(), rec);
        assert!("2;2;8".parse::<CacheRecord>().is_err());
        assert!("3;2;8;1/2".parse::<CacheRecord>().is_err());
        assert!("2;2;8;1/0".parse::<CacheRecord>().is_err());
        assert!("2;2;x;1/2".parse::<CacheRecord>().is_err());
    }

    #[test]
    fn cache_is_shared_and_sorted() {
        let cache = WeingartenCache::new();
        cache.get(5, &"2,1".parse().unwrap()).unwrap();
        cache.get(4, &"2".parse().unwrap()).unwrap();
        cache.get(3, &"1,1".parse().unwrap()).unwrap();
        let recs = cache.records();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].cycle_type.to_string(), "1,1");
        assert_eq!(recs[1].cycle_type.to_string(), "2");
        assert_eq!(recs[2].cycle_type.degree(), 3);
    }
}
