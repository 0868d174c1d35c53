//! Exact unitary Weingarten calculus.
//!
//! [`wg`] evaluates the Weingarten function from the character expansion with
//! exact rationals; [`integrate_monomial`] and [`evaluate_trace_expression`]
//! use it to compute Haar moments, the latter by decomposing the wiring left
//! after removing the unitaries into closed loops. [`wg_bound_ratio`]
//! tabulates `|Wg(n, σ)|` against the power-law envelope
//! `n^{-p-|σ|(1-2/k)}`.

mod bound;
mod cache;
mod monomial;
mod trace_expr;

use thiserror::Error;

use crate::symgroup::SymGroupError;

pub(crate) use bound::least_squares_slope;
pub use bound::{wg_bound_ratio, BoundReport, BoundRow, ClassRatio, ClassSlope, SLOPE_TOLERANCE};
pub use cache::{wg, wg_cycle_type, CacheRecord, WeingartenCache, MAX_WG_DEGREE};
pub use monomial::{integrate_monomial, MAX_MONOMIAL_DEGREE};
pub use trace_expr::{
    evaluate_trace_expression, Token, TraceExpression, TraceValue, MAX_TRACE_DEGREE,
};

#[derive(Debug, Error)]
pub enum WeingartenError {
    #[error("degree {p} exceeds the supported maximum {max} for {what}")]
    DegreeTooLarge { what: &'static str, p: usize, max: usize },
    #[error("dimension n = {n} is smaller than degree p = {p}: s_λ,n(1) vanishes for some λ ⊢ p")]
    SingularDimension { n: u64, p: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("tuple lengths differ: {0:?}")]
    LengthMismatch([usize; 4]),
    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: u64 },
    #[error("hypothesis p^k <= n violated: p^k = {pk} but min n = {n}")]
    BoundHypothesis { pk: f64, n: u64 },
    #[error("malformed trace expression: {0}")]
    Malformed(String),
    #[error("cache line {line}: {msg}")]
    CacheParse { line: usize, msg: String },
    #[error(transparent)]
    SymGroup(#[from] SymGroupError),
}
