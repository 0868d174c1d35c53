//! Sampling the random MPS ensemble `(U, V, W, Λ, Ω)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, matrix_serde, CMatrix, Op, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown omega distribution {0:?} (expected dirichlet or uniform-normalized)")]
    UnknownOmegaDist(String),
}

/// Shape of one ensemble draw plus the seed all its randomness flows from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Physical dimension.
    pub d: usize,
    /// Bond dimension.
    #[serde(rename = "D")]
    pub bond_dim: usize,
    /// Number of bulk sites.
    pub n: usize,
    /// Window size.
    pub l: usize,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn new(d: usize, bond_dim: usize, n: usize, l: usize, seed: u64) -> Result<Self, EnsembleError> {
        let params = Self { d, bond_dim, n, l, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        let fail = |msg: String| Err(EnsembleError::InvalidParams(msg));
        if self.d == 0 {
            return fail("d must be at least 1".into());
        }
        if self.bond_dim == 0 {
            return fail("D must be at least 1".into());
        }
        if self.l == 0 || self.l > self.n {
            return fail(format!("window l={} must satisfy 1 <= l <= n={}", self.l, self.n));
        }
        if !(self.n - self.l).is_multiple_of(2) {
            return fail(format!("n - l = {} must be even", self.n - self.l));
        }
        Ok(())
    }

    /// Sites on each side of the centered window.
    pub fn t(&self) -> usize {
        (self.n - self.l) / 2
    }

    /// `d^l`.
    pub fn window_dim(&self) -> usize {
        self.d.pow(self.l as u32)
    }

    pub fn with_bond_dim(self, bond_dim: usize) -> Self {
        Self { bond_dim, ..self }
    }
}

/// Distribution of the spectrum `Ω` of `R`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaDist {
    /// Flat Dirichlet(1, …, 1).
    #[default]
    Dirichlet,
    /// `D` independent uniforms divided by their sum.
    UniformNormalized,
}

impl OmegaDist {
    pub fn sample<R: Rng + ?Sized>(self, dim: usize, rng: &mut R) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            OmegaDist::Dirichlet => (0..dim).map(|_| Exp1.sample(rng)).collect(),
            OmegaDist::UniformNormalized => (0..dim).map(|_| rng.random::<f64>()).collect(),
        };
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter().map(|x| x / total).collect()
        } else {
            vec![1.0 / dim as f64; dim]
        }
    }
}

impl fmt::Display for OmegaDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmegaDist::Dirichlet => "dirichlet",
            OmegaDist::UniformNormalized => "uniform-normalized",
        })
    }
}

impl FromStr for OmegaDist {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet" => Ok(OmegaDist::Dirichlet),
            "uniform-normalized" => Ok(OmegaDist::UniformNormalized),
            other => Err(EnsembleError::UnknownOmegaDist(other.to_string())),
        }
    }
}

/// Stream identifiers. Every random quantity is drawn from
/// `ChaCha20(seed)` on its own stream, so a sample never depends on which
/// worker produced it or on how many samples came before it.
pub mod streams {
    const GRID_SHIFT: u32 = 40;

    /// Fixed `U` shared by all samples of a run.
    pub const FIXED_U: u64 = u64::MAX;
    /// Fixed `Ω` shared by all samples of a run.
    pub const FIXED_OMEGA: u64 = u64::MAX - 1;
    const PERTURBATION_BIT: u64 = 1 << 63;

    /// Stream of sample `index` at position `grid` of a parameter grid.
    pub fn sample(grid: usize, index: usize) -> u64 {
        assert!((index as u64) < 1 << GRID_SHIFT && (grid as u64) < 1 << 22);
        ((grid as u64) << GRID_SHIFT) | index as u64
    }

    /// Companion stream used to perturb sample `index`.
    pub fn perturbation(grid: usize, index: usize) -> u64 {
        sample(grid, index) | PERTURBATION_BIT
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// MPS tensors `A_i[a, b] = U[i·D + a, b]`, the `(i, 0)` blocks of `U` in the
/// `C^d ⊗ C^D` factorization, so that `Σ_i A_i† A_i = I_D`.
pub fn mps_tensors(u: &CMatrix, d: usize, bond_dim: usize) -> Result<Vec<CMatrix>, EnsembleError> {
    let size = d * bond_dim;
    if u.nrows() != size || u.ncols() != size {
        return Err(EnsembleError::DimensionMismatch { expected: size, got: u.nrows().max(u.ncols()) });
    }
    Ok((0..d)
        .map(|i| u.view((i * bond_dim, 0), (bond_dim, bond_dim)).into_owned())
        .collect())
}

/// Boundary data of one draw.
#[derive(Clone, Debug)]
pub struct Boundaries {
    pub v: CMatrix,
    pub w: CMatrix,
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
    /// `V Λ V†`
    pub l: CMatrix,
    /// `W Ω W†`
    pub r: CMatrix,
}

impl Boundaries {
    pub fn from_parts(v: CMatrix, w: CMatrix, lambda: Vec<f64>, omega: Vec<f64>) -> Self {
        let l = conjugate_diagonal(&v, &lambda);
        let r = conjugate_diagonal(&w, &omega);
        Self { v, w, lambda, omega, l, r }
    }
}

/// `X diag(values) X†`, Hermitized.
pub fn conjugate_diagonal(x: &CMatrix, values: &[f64]) -> CMatrix {
    let mut scaled = x.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    linalg::hermitize(&linalg::mul(&scaled, Op::Plain, x, Op::Adjoint))
}

/// Draws `V`, `W`, `Λ`, `Ω` in that order.
pub fn sample_boundaries<R: Rng + ?Sized>(bond_dim: usize, omega_dist: OmegaDist, rng: &mut R) -> Boundaries {
    let v = haar_unitary(bond_dim, rng);
    let w = haar_unitary(bond_dim, rng);
    let lambda: Vec<f64> = (0..bond_dim).map(|_| rng.random::<f64>()).collect();
    let omega = omega_dist.sample(bond_dim, rng);
    Boundaries::from_parts(v, w, lambda, omega)
}

/// One draw from the ensemble together with its derived tensors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsSample {
    pub d: usize,
    #[serde(rename = "D")]
    pub bond_dim: usize,
    #[serde(with = "matrix_serde")]
    pub u: CMatrix,
    #[serde(with = "matrix_serde")]
    pub v: CMatrix,
    #[serde(with = "matrix_serde")]
    pub w: CMatrix,
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
    #[serde(with = "matrix_serde::vec")]
    pub a: Vec<CMatrix>,
    #[serde(with = "matrix_serde")]
    pub l: CMatrix,
    #[serde(with = "matrix_serde")]
    pub r: CMatrix,
}

impl MpsSample {
    pub fn from_parts(d: usize, u: CMatrix, boundaries: Boundaries) -> Result<Self, EnsembleError> {
        let bond_dim = boundaries.lambda.len();
        for (m, expected) in [(&boundaries.v, bond_dim), (&boundaries.w, bond_dim)] {
            if m.nrows() != expected || m.ncols() != expected {
                return Err(EnsembleError::DimensionMismatch { expected, got: m.nrows() });
            }
        }
        if boundaries.omega.len() != bond_dim {
            return Err(EnsembleError::DimensionMismatch { expected: bond_dim, got: boundaries.omega.len() });
        }
        let a = mps_tensors(&u, d, bond_dim)?;
        let Boundaries { v, w, lambda, omega, l, r } = boundaries;
        Ok(Self { d, bond_dim, u, v, w, lambda, omega, a, l, r })
    }

    /// Draws `U` then the boundaries from `rng`.
    pub fn draw<R: Rng + ?Sized>(params: &EnsembleParams, omega_dist: OmegaDist, rng: &mut R) -> Self {
        let u = haar_unitary(params.d * params.bond_dim, rng);
        let boundaries = sample_boundaries(params.bond_dim, omega_dist, rng);
        Self::from_parts(params.d, u, boundaries).expect("shapes agree by construction")
    }

    /// Rebuilds `A`, `L`, `R` after the primary fields were edited.
    pub fn refresh(&mut self) {
        self.a = mps_tensors(&self.u, self.d, self.bond_dim).expect("shape unchanged");
        self.l = conjugate_diagonal(&self.v, &self.lambda);
        self.r = conjugate_diagonal(&self.w, &self.omega);
    }

    /// `max |Σ_i A_i† A_i − I|`.
    pub fn isometry_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.bond_dim, self.bond_dim);
        for a in &self.a {
            linalg::gemm(C64::new(1.0, 0.0), a, Op::Adjoint, a, Op::Plain, C64::new(1.0, 0.0), &mut sum);
        }
        linalg::distance_from_identity(&sum)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sample serializes")
    }
}
