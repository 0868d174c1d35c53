//! Contraction of the reduced density matrix of a window of sites.
//!
//! The state on `n` sites is `ρ[i, j] = tr(L A_{i_1}⋯A_{i_n} R A_{j_n}†⋯A_{j_1}†)`.
//! Sites to the right of the window are folded into `R` with the channel
//! `T(X) = Σ_i A_i X A_i†`, sites to the left into `L` with its adjoint
//! `T*(Y) = Σ_i A_i† Y A_i`, and only `D × D` blocks are kept for the window.

mod density;
pub mod oracle;

use thiserror::Error;

pub use density::{DensityMatrix, DEGENERATE_TRACE};

use crate::ensembles::{EnsembleError, EnsembleParams, MpsSample};
use crate::linalg::{self, CMatrix, Op, C64};

/// Largest number of window entries `d^{2l}` the engine will build.
pub const MAX_WINDOW_ENTRIES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("window of {l} sites at d={d} has {entries} entries (limit {MAX_WINDOW_ENTRIES})")]
    WindowTooLarge { d: usize, l: usize, entries: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("degenerate sample: trace {trace:e} is below {DEGENERATE_TRACE:e}")]
    Degenerate { trace: f64 },
    #[error("observable requires a normalized density matrix")]
    NotNormalized,
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

fn check_square(a: &[CMatrix], x: &CMatrix) -> Result<(), MpsError> {
    let dim = a.first().map_or(0, CMatrix::nrows);
    if !x.is_square() || x.nrows() != dim {
        return Err(MpsError::SizeMismatch { expected: dim, got: x.nrows() });
    }
    Ok(())
}

/// `Σ_i A_i X A_i†`.
pub fn channel_apply(a: &[CMatrix], x: &CMatrix) -> Result<CMatrix, MpsError> {
    check_square(a, x)?;
    Ok(channel_unchecked(a, x))
}

/// `Σ_i A_i† Y A_i`, the Hilbert–Schmidt adjoint of [`channel_apply`].
pub fn adjoint_channel_apply(a: &[CMatrix], y: &CMatrix) -> Result<CMatrix, MpsError> {
    check_square(a, y)?;
    Ok(adjoint_channel_unchecked(a, y))
}

fn channel_unchecked(a: &[CMatrix], x: &CMatrix) -> CMatrix {
    let dim = x.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    let mut ax = CMatrix::zeros(dim, dim);
    for ai in a {
        linalg::gemm(ONE, ai, Op::Plain, x, Op::Plain, ZERO, &mut ax);
        linalg::gemm(ONE, &ax, Op::Plain, ai, Op::Adjoint, ONE, &mut out);
    }
    out
}

fn adjoint_channel_unchecked(a: &[CMatrix], y: &CMatrix) -> CMatrix {
    let dim = y.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    let mut ya = CMatrix::zeros(dim, dim);
    for ai in a {
        linalg::gemm(ONE, y, Op::Plain, ai, Op::Plain, ZERO, &mut ya);
        linalg::gemm(ONE, ai, Op::Adjoint, &ya, Op::Plain, ONE, &mut out);
    }
    out
}

/// `T^k(X)`.
pub fn channel_power(a: &[CMatrix], x: &CMatrix, k: usize) -> Result<CMatrix, MpsError> {
    check_square(a, x)?;
    Ok((0..k).fold(x.clone(), |acc, _| channel_unchecked(a, &acc)))
}

/// `(T*)^k(Y)`.
pub fn adjoint_channel_power(a: &[CMatrix], y: &CMatrix, k: usize) -> Result<CMatrix, MpsError> {
    check_square(a, y)?;
    Ok((0..k).fold(y.clone(), |acc, _| adjoint_channel_unchecked(a, &acc)))
}

/// Untraced bond-space blocks `A_{i_1}⋯A_{i_m} X A_{j_m}†⋯A_{j_1}†` for every
/// pair of index strings of length `m`.
///
/// Strings are encoded row-major with the first site most significant; the
/// block for `(I, J)` sits at `I · d^m + J`.
#[derive(Clone, Debug)]
pub struct WindowState {
    pub d: usize,
    pub sites: usize,
    pub blocks: Vec<CMatrix>,
}

impl WindowState {
    /// Builds the blocks by adding sites from the rightmost one inward.
    pub fn build(a: &[CMatrix], x: &CMatrix, sites: usize) -> Result<Self, MpsError> {
        check_square(a, x)?;
        let d = a.len();
        let entries = checked_entries(d, sites)?;
        let dim = x.nrows();
        let mut blocks = vec![x.clone()];
        let mut width = 1usize;
        let mut ax = CMatrix::zeros(dim, dim);
        for _ in 0..sites {
            let new_width = width * d;
            let mut next = vec![CMatrix::zeros(0, 0); new_width * new_width];
            for big_i in 0..width {
                for big_j in 0..width {
                    let block = &blocks[big_i * width + big_j];
                    for (i, ai) in a.iter().enumerate() {
                        linalg::gemm(ONE, ai, Op::Plain, block, Op::Plain, ZERO, &mut ax);
                        for (j, aj) in a.iter().enumerate() {
                            let row = i * width + big_i;
                            let col = j * width + big_j;
                            next[row * new_width + col] = linalg::mul(&ax, Op::Plain, aj, Op::Adjoint);
                        }
                    }
                }
            }
            blocks = next;
            width = new_width;
        }
        debug_assert_eq!(blocks.len(), entries);
        Ok(Self { d, sites, blocks })
    }

    pub fn width(&self) -> usize {
        self.d.pow(self.sites as u32)
    }

    /// Block for index strings `i`, `j` (0-based symbols, first site first).
    pub fn block(&self, i: &[usize], j: &[usize]) -> &CMatrix {
        assert_eq!(i.len(), self.sites);
        assert_eq!(j.len(), self.sites);
        let encode = |s: &[usize]| s.iter().fold(0, |acc, &x| acc * self.d + x);
        &self.blocks[encode(i) * self.width() + encode(j)]
    }

    /// `max ‖B(J, I) − B(I, J)†‖`.
    pub fn hermiticity_defect(&self) -> f64 {
        let w = self.width();
        let mut worst = 0.0f64;
        for i in 0..w {
            for j in 0..w {
                let diff = &self.blocks[j * w + i] - self.blocks[i * w + j].adjoint();
                worst = worst.max(linalg::max_abs(&diff));
            }
        }
        worst
    }
}

fn checked_entries(d: usize, l: usize) -> Result<usize, MpsError> {
    let entries = u32::try_from(2 * l)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .filter(|&e| e <= MAX_WINDOW_ENTRIES)
        .ok_or(MpsError::WindowTooLarge {
            d,
            l,
            entries: d.saturating_pow((2 * l).min(u32::MAX as usize) as u32),
        })?;
    Ok(entries)
}

/// Unnormalized reduced density matrix of the centered window.
pub fn reduced_density(sample: &MpsSample, params: &EnsembleParams) -> Result<DensityMatrix, MpsError> {
    params.validate()?;
    if sample.d != params.d || sample.bond_dim != params.bond_dim {
        return Err(MpsError::SizeMismatch { expected: params.d * params.bond_dim, got: sample.d * sample.bond_dim });
    }
    reduced_density_window(sample, params.n, params.t(), params.l)
}

/// Reduced density matrix of sites `t_left + 1 ..= t_left + l` of an
/// `n`-site chain.
pub fn reduced_density_window(
    sample: &MpsSample,
    n: usize,
    t_left: usize,
    l: usize,
) -> Result<DensityMatrix, MpsError> {
    if l == 0 || t_left + l > n {
        return Err(MpsError::InvalidWindow(format!("sites {}..={} of {n}", t_left + 1, t_left + l)));
    }
    let d = sample.d;
    checked_entries(d, l)?;
    let a = &sample.a;
    let t_right = n - t_left - l;
    let right = channel_power(a, &sample.r, t_right)?;
    let left = adjoint_channel_power(a, &sample.l, t_left)?;

    // The outermost window site is absorbed into the left boundary:
    // tr(L' A_i Y A_j†) = tr(G_{ji} Y) with G_{ji} = A_j† L' A_i.
    let inner = WindowState::build(a, &right, l - 1)?;
    let dim = sample.bond_dim;
    let mut g = Vec::with_capacity(d * d);
    let mut la = CMatrix::zeros(dim, dim);
    for aj in a {
        for ai in a {
            linalg::gemm(ONE, &left, Op::Plain, ai, Op::Plain, ZERO, &mut la);
            g.push(linalg::mul(aj, Op::Adjoint, &la, Op::Plain));
        }
    }
    let inner_width = inner.width();
    let width = inner_width * d;
    let mut rho = CMatrix::zeros(width, width);
    for i in 0..d {
        for j in 0..d {
            let gji = &g[j * d + i];
            for big_i in 0..inner_width {
                for big_j in 0..inner_width {
                    let value = linalg::trace_of_product(gji, &inner.blocks[big_i * inner_width + big_j]);
                    rho[(i * inner_width + big_i, j * inner_width + big_j)] = value;
                }
            }
        }
    }
    Ok(DensityMatrix::new(rho, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{stream_rng, OmegaDist};

    fn draw(d: usize, dim: usize, seed: u64) -> MpsSample {
        let params = EnsembleParams::new(d, dim, 2, 2, seed).unwrap();
        MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(seed, 0))
    }

    #[test]
    fn channel_preserves_trace_and_positivity() {
        for (d, dim) in [(1, 4), (2, 1), (2, 5), (3, 3)] {
            let s = draw(d, dim, 1);
            let out = channel_apply(&s.a, &s.r).unwrap();
            assert!((linalg::trace(&out) - linalg::trace(&s.r)).norm() < 1e-9);
            assert!(linalg::hermitian_eigenvalues(&out)[0] > -1e-12);
        }
        let s = draw(1, 4, 2);
        let out = channel_apply(&s.a, &s.r).unwrap();
        let (before, after) = (linalg::hermitian_eigenvalues(&s.r), linalg::hermitian_eigenvalues(&out));
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(channel_apply(&s.a, &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn adjoint_channel_is_adjoint() {
        let s = draw(3, 4, 3);
        let lhs = linalg::trace_of_product(&s.l, &channel_apply(&s.a, &s.r).unwrap());
        let rhs = linalg::trace_of_product(&adjoint_channel_apply(&s.a, &s.l).unwrap(), &s.r);
        assert!((lhs - rhs).norm() < 1e-12);
        let id = CMatrix::identity(4, 4);
        assert!(linalg::distance_from_identity(&adjoint_channel_apply(&s.a, &id).unwrap()) < 1e-12);
    }

    #[test]
    fn window_blocks_are_hermitian_pairs() {
        let s = draw(2, 3, 4);
        let state = WindowState::build(&s.a, &s.r, 3).unwrap();
        assert_eq!(state.blocks.len(), 64);
        assert!(state.hermiticity_defect() < 1e-10);
        let direct = {
            let mut x = s.r.clone();
            for (i, j) in [(1usize, 0usize), (0, 0), (1, 1)].iter().rev() {
                x = linalg::mul(&linalg::matmul(&s.a[*i], &x), Op::Plain, &s.a[*j], Op::Adjoint);
            }
            x
        };
        assert!(linalg::max_abs(&(state.block(&[1, 0, 1], &[0, 0, 1]) - direct)) < 1e-12);
    }

    #[test]
    fn bond_dimension_one_gives_pure_state() {
        let params = EnsembleParams::new(2, 1, 6, 2, 5).unwrap();
        let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(5, 0));
        let rho = reduced_density(&s, &params).unwrap().normalize().unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_window_with_identity_left_has_unit_trace() {
        let params = EnsembleParams::new(2, 3, 4, 4, 6).unwrap();
        let mut s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(6, 0));
        s.lambda = vec![1.0; 3];
        s.refresh();
        let rho = reduced_density(&s, &params).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_symbol_is_scalar() {
        let params = EnsembleParams::new(1, 3, 5, 1, 7).unwrap();
        let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(7, 0));
        let rho = reduced_density(&s, &params).unwrap();
        assert_eq!(rho.dim(), 1);
        let mut chain = CMatrix::identity(3, 3);
        for _ in 0..5 {
            chain = linalg::matmul(&chain, &s.a[0]);
        }
        let expected = linalg::trace(&linalg::mul(
            &linalg::matmul(&linalg::matmul(&s.l, &chain), &s.r),
            Op::Plain,
            &chain,
            Op::Adjoint,
        ));
        assert!((rho.entries[(0, 0)] - expected).norm() < 1e-12);
        assert!(expected.re >= 0.0);
    }

    #[test]
    fn window_guard() {
        let params = EnsembleParams::new(2, 1, 7, 7, 0).unwrap();
        let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(0, 0));
        assert!(matches!(reduced_density(&s, &params), Err(MpsError::WindowTooLarge { entries: 16384, .. })));
        assert!(reduced_density_window(&s, 7, 6, 2).is_err());
        assert!(reduced_density_window(&s, 7, 0, 0).is_err());
        assert!(reduced_density_window(&s, 7, 1, 6).is_ok());
    }

    #[test]
    fn partial_trace_consistency() {
        let s = draw(2, 3, 8);
        let n = 6;
        for t_left in 0..n {
            for l in 1..n - t_left {
                let big = reduced_density_window(&s, n, t_left, l + 1).unwrap();
                let small = reduced_density_window(&s, n, t_left, l).unwrap();
                let traced = oracle::trace_last_site(&big.entries, 2);
                assert!(linalg::max_abs(&(traced - &small.entries)) < 1e-9, "t_left={t_left} l={l}");
            }
        }
    }

    #[test]
    fn scaling_left_boundary() {
        let params = EnsembleParams::new(2, 4, 6, 2, 9).unwrap();
        let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(9, 0));
        let mut scaled = s.clone();
        scaled.l = s.l.scale(0.37);
        let rho = reduced_density(&s, &params).unwrap();
        let rho_scaled = reduced_density(&scaled, &params).unwrap();
        assert!(linalg::max_abs(&(rho.entries.scale(0.37) - &rho_scaled.entries)) < 1e-10);
        let (a, b) = (rho.normalize().unwrap(), rho_scaled.normalize().unwrap());
        assert!(linalg::max_abs(&(a.entries - b.entries)) < 1e-10);
    }

    #[test]
    fn sampled_states_are_hermitian_psd() {
        for seed in 0..10 {
            let params = EnsembleParams::new(2, 6, 8, 2, seed).unwrap();
            let s = MpsSample::draw(&params, OmegaDist::Dirichlet, &mut stream_rng(seed, 0));
            let rho = reduced_density(&s, &params).unwrap();
            assert!(rho.hermiticity_defect() < 1e-10);
            assert!(rho.eigenvalues()[0] > -1e-9);
        }
    }
}
