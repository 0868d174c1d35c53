//! Random translation-invariant matrix product states.
//!
//! The crate samples the ensemble of MPS parametrized by a Haar unitary on
//! `C^d ⊗ C^D` together with random boundary matrices, contracts the reduced
//! density matrix of a central window, and checks the resulting observables
//! against exact Weingarten-calculus values.

pub mod symgroup;
pub mod linalg;
pub mod weingarten;
pub mod ensembles;
pub mod mps;
pub mod experiments;
pub mod io;
pub mod run;
