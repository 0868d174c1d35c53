use serde::{Deserialize, Serialize};

use super::MpsError;
use crate::linalg::{self, matrix_serde, CMatrix};

/// Traces at or below this value cannot be normalized.
pub const DEGENERATE_TRACE: f64 = 1e-14;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(with = "matrix_serde")]
    pub entries: CMatrix,
    pub normalized: bool,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix, normalized: bool) -> Self {
        assert!(entries.is_square());
        Self { entries, normalized }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    /// `ρ / tr ρ`.
    pub fn normalize(&self) -> Result<Self, MpsError> {
        let trace = self.trace();
        if trace.is_nan() || trace <= DEGENERATE_TRACE {
            return Err(MpsError::Degenerate { trace });
        }
        Ok(Self { entries: self.entries.unscale(trace), normalized: true })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { entries: self.entries.scale(c), normalized: false }
    }

    /// `tr ρ² = Σ |ρ_ij|²` (valid for Hermitian `ρ`).
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `−ln tr ρ²`.
    pub fn renyi2(&self) -> Result<f64, MpsError> {
        self.require_normalized()?;
        Ok(-self.purity().ln())
    }

    /// `max_μ |μ − 1/dim|` over the eigenvalues of the Hermitian part.
    pub fn sup_distance_to_mixed(&self) -> Result<f64, MpsError> {
        self.require_normalized()?;
        let mixed = 1.0 / self.dim() as f64;
        Ok(self.eigenvalues().iter().map(|mu| (mu - mixed).abs()).fold(0.0, f64::max))
    }

    /// Eigenvalues of `(ρ + ρ†)/2`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs(&(&self.entries - self.entries.adjoint()))
    }

    fn require_normalized(&self) -> Result<(), MpsError> {
        if self.normalized {
            Ok(())
        } else {
            Err(MpsError::NotNormalized)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("density matrix serializes")
    }

    /// One eigenvalue per line, ascending.
    pub fn eigenvalue_text(&self) -> String {
        self.eigenvalues().iter().map(|mu| format!("{mu:.17e}\n")).collect()
    }
}
