//! Quantum objects with validated invariants: states, effects, assemblages,
//! Kraus channels, instruments and Stinespring dilations.

mod assemblage;
mod channel;
pub mod random;

pub use assemblage::{
    compatible_measurement, conditional_assemblage, fine_grain, ho_state_assemblage,
    maximally_entangled, noisy_pauli_assemblage, pure_state_family, FineGrained,
    MeasurementAssemblage, ResponseTable, StateAssemblage,
};
pub use channel::{
    amplitude_damping_kraus, instrument_from_dilation, minimal_dilation, InstrumentAssemblage,
    Isometry, KrausChannel, CHOI_RANK_CUTOFF,
};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64, PSD_TOL};

/// Tolerance on trace and positivity for single objects.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance on normalization, completeness and no-signaling of families.
pub const ASSEMBLAGE_TOL: f64 = 1e-9;
/// Outcomes with smaller probability are treated as absent.
pub const PROB_FLOOR: f64 = 1e-12;

fn check_psd(m: &HermitianMatrix) -> Result<()> {
    let e = m.eig()?;
    if e.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(())
}

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let trace = m.trace();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        check_psd(&m)?;
        Ok(Self(m))
    }

    /// Normalizes a PSD operator of positive trace.
    pub fn normalized(m: &HermitianMatrix) -> Result<Self> {
        let trace = m.trace();
        if trace <= 0.0 {
            return Err(Error::InvalidTrace { trace });
        }
        Self::new(m.scale(1.0 / trace))
    }

    pub(crate) fn from_trusted(m: HermitianMatrix) -> Self {
        Self(m)
    }

    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::InvalidTrace { trace: norm_sq });
        }
        Ok(Self(HermitianMatrix::projector(amplitudes)))
    }

    /// Computational basis state `|k><k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        Self(HermitianMatrix::projector(&v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.0.as_matrix()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).expect("square")
    }

    /// Convex combination `t·self + (1-t)·other`.
    pub fn mix(&self, t: f64, other: &Self) -> Result<Self> {
        Self::new(self.0.scale(t).add(&other.0.scale(1.0 - t))?)
    }
}

/// Sub-normalized conditional state `σ = p·ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedState {
    matrix: HermitianMatrix,
    weight: f64,
}

impl SubnormalizedState {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let weight = matrix.trace();
        if !(-STATE_TOL..=1.0 + STATE_TOL).contains(&weight) {
            return Err(Error::InvalidTrace { trace: weight });
        }
        check_psd(&matrix)?;
        Ok(Self {
            matrix,
            weight: weight.clamp(0.0, 1.0),
        })
    }

    pub fn from_state(p: f64, rho: &DensityMatrix) -> Result<Self> {
        Self::new(rho.as_hermitian().scale(p))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// The normalized conditional state, or `None` below [`PROB_FLOOR`].
    pub fn conditional(&self) -> Option<DensityMatrix> {
        if self.weight < PROB_FLOOR {
            return None;
        }
        Some(DensityMatrix(self.matrix.scale(1.0 / self.matrix.trace())))
    }
}

/// POVM element `0 ≤ M ≤ 𝟙`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(HermitianMatrix);

impl Effect {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let e = m.eig()?;
        if e.min() < -STATE_TOL {
            return Err(Error::InvalidEffect(format!(
                "negative eigenvalue {:.3e}",
                e.min()
            )));
        }
        if e.max() > 1.0 + STATE_TOL {
            return Err(Error::InvalidEffect(format!(
                "eigenvalue {:.6} exceeds 1",
                e.max()
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_trusted(m: HermitianMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.0.as_matrix()
    }
}
