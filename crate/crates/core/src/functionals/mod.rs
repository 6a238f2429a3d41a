//! Convex functionals `g` paired with their concave roofs `F_g`.
//!
//! The witness engine only sees [`WitnessFunctional`], a context-free map
//! from density matrices to the pair `(g(ρ), F_g(ρ))`. Observables and
//! reference bases are bound when the functional is built.

mod measures;
mod sampler;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use measures::{
    ergotropy, ergotropy_pure_roof, l2_coherence, summed_variance, variance, wysi, wysi_lower_bound,
};
pub use sampler::{roof_sample_lower_bound, roof_sample_lower_bound_with};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::quantum::DensityMatrix;

const BASIS_TOL: f64 = 1e-10;

/// Orthonormal reference basis `{Π_i = |i><i|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBasis {
    projectors: Vec<HermitianMatrix>,
    /// Basis vectors as columns.
    unitary: ComplexMatrix,
}

impl ReferenceBasis {
    /// Validates a list of rank-one orthogonal projectors summing to `𝟙`.
    pub fn new(projectors: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = projectors
            .first()
            .map(HermitianMatrix::dim)
            .ok_or_else(|| Error::InvalidBasis("empty basis".into()))?;
        if projectors.len() != dim {
            return Err(Error::InvalidBasis(format!(
                "{} projectors for dimension {dim}",
                projectors.len()
            )));
        }
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::InvalidBasis(format!(
                    "projector {i} has wrong dimension"
                )));
            }
            for (j, q) in projectors.iter().enumerate() {
                let prod = p.as_matrix() * q.as_matrix();
                let expected = if i == j {
                    p.as_matrix().clone()
                } else {
                    ComplexMatrix::zeros(dim, dim)
                };
                let dev = prod.max_abs_diff(&expected);
                if dev > BASIS_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "Π_{i}Π_{j} deviates from δ_ij Π_i by {dev:.3e}"
                    )));
                }
            }
        }
        let mut vectors = Vec::with_capacity(dim);
        for (i, p) in projectors.iter().enumerate() {
            let e = p.eig()?;
            if (e.max() - 1.0).abs() > BASIS_TOL || (p.trace() - 1.0).abs() > BASIS_TOL {
                return Err(Error::InvalidBasis(format!(
                    "projector {i} is not rank one"
                )));
            }
            vectors.push(e.vector(dim - 1));
        }
        let unitary = ComplexMatrix::from_fn(dim, dim, |r, c| vectors[c][r]);
        Ok(Self {
            projectors,
            unitary,
        })
    }

    /// Basis made of the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidBasis("basis matrix must be square".into()));
        }
        Self::new(
            (0..u.cols())
                .map(|c| HermitianMatrix::projector(&u.column(c)))
                .collect(),
        )
    }

    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|k| {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[k] = C64::new(1.0, 0.0);
                HermitianMatrix::projector(&v)
            })
            .collect();
        Self {
            projectors,
            unitary: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn projectors(&self) -> &[HermitianMatrix] {
        &self.projectors
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }
}

/// Data a functional needs besides the state.
#[derive(Debug, Clone, PartialEq)]
pub enum Context {
    Observable(HermitianMatrix),
    Basis(ReferenceBasis),
}

impl Context {
    pub fn dim(&self) -> usize {
        match self {
            Context::Observable(h) => h.dim(),
            Context::Basis(b) => b.dim(),
        }
    }
}

/// A convex functional together with an upper bound that is tight on pure
/// states. Implementors must report `roof_exact() == false` whenever
/// `roof` is not the true concave roof, so the witness engine can refuse them.
pub trait ConvexFunctional: Send + Sync {
    fn name(&self) -> &str;
    fn context(&self) -> &Context;
    fn g(&self, rho: &DensityMatrix) -> Result<f64>;
    fn roof(&self, rho: &DensityMatrix) -> Result<f64>;
    fn roof_exact(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Wysi,
    WysiLower,
    L2,
    Ergotropy,
}

struct Builtin {
    kind: Kind,
    context: Context,
}

impl Builtin {
    fn observable(&self) -> &HermitianMatrix {
        match &self.context {
            Context::Observable(h) => h,
            Context::Basis(_) => unreachable!("observable functional built with a basis"),
        }
    }

    fn basis(&self) -> &ReferenceBasis {
        match &self.context {
            Context::Basis(b) => b,
            Context::Observable(_) => unreachable!("basis functional built with an observable"),
        }
    }
}

impl ConvexFunctional for Builtin {
    fn name(&self) -> &str {
        match self.kind {
            Kind::Wysi => "wysi",
            Kind::WysiLower => "wysi_lower",
            Kind::L2 => "l2",
            Kind::Ergotropy => "ergotropy",
        }
    }

    fn context(&self) -> &Context {
        &self.context
    }

    fn g(&self, rho: &DensityMatrix) -> Result<f64> {
        match self.kind {
            Kind::Wysi => wysi(rho, self.observable()),
            Kind::WysiLower => wysi_lower_bound(rho, self.observable()),
            Kind::L2 => l2_coherence(rho, self.basis()),
            Kind::Ergotropy => ergotropy(rho, self.observable()),
        }
    }

    fn roof(&self, rho: &DensityMatrix) -> Result<f64> {
        match self.kind {
            Kind::Wysi => variance(rho, self.observable()),
            // I^L collapses to Var/2 on pure states, so its roof is Var/2.
            Kind::WysiLower => Ok(0.5 * variance(rho, self.observable())?),
            Kind::L2 => summed_variance(rho, self.basis()),
            Kind::Ergotropy => ergotropy_pure_roof(rho, self.observable()),
        }
    }
}

/// Shared handle to a `(g, F_g)` pair.
#[derive(Clone)]
pub struct WitnessFunctional {
    inner: Arc<dyn ConvexFunctional>,
}

impl fmt::Debug for WitnessFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WitnessFunctional")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .field("roof_exact", &self.roof_exact())
            .finish()
    }
}

impl WitnessFunctional {
    pub fn new(f: impl ConvexFunctional + 'static) -> Self {
        Self { inner: Arc::new(f) }
    }

    /// Skew information with the variance as roof.
    pub fn wysi(h: HermitianMatrix) -> Self {
        Self::new(Builtin {
            kind: Kind::Wysi,
            context: Context::Observable(h),
        })
    }

    /// Commutator lower bound `I^L` with roof `Var/2`.
    pub fn wysi_lower(h: HermitianMatrix) -> Self {
        Self::new(Builtin {
            kind: Kind::WysiLower,
            context: Context::Observable(h),
        })
    }

    /// ℓ2 coherence with the summed variance as roof.
    pub fn l2(basis: ReferenceBasis) -> Self {
        Self::new(Builtin {
            kind: Kind::L2,
            context: Context::Basis(basis),
        })
    }

    /// Ergotropy with its affine pure-state roof. Always yields zero violation.
    pub fn ergotropy(h: HermitianMatrix) -> Self {
        Self::new(Builtin {
            kind: Kind::Ergotropy,
            context: Context::Observable(h),
        })
    }

    /// Builds a shipped functional from its registry name.
    pub fn from_name(name: &str, context: Context) -> Result<Self> {
        let needs_basis = match name {
            "wysi" | "wysi_lower" | "ergotropy" => false,
            "l2" => true,
            other => return Err(Error::UnknownFunctional(other.to_string())),
        };
        match (name, context) {
            ("wysi", Context::Observable(h)) => Ok(Self::wysi(h)),
            ("wysi_lower", Context::Observable(h)) => Ok(Self::wysi_lower(h)),
            ("ergotropy", Context::Observable(h)) => Ok(Self::ergotropy(h)),
            ("l2", Context::Basis(b)) => Ok(Self::l2(b)),
            _ => Err(Error::InvalidBasis(format!(
                "functional '{name}' needs {}",
                if needs_basis {
                    "a reference basis"
                } else {
                    "an observable"
                }
            ))),
        }
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn context(&self) -> &Context {
        self.inner.context()
    }

    pub fn dim(&self) -> usize {
        self.context().dim()
    }

    pub fn roof_exact(&self) -> bool {
        self.inner.roof_exact()
    }

    pub fn evaluate_g(&self, rho: &DensityMatrix) -> Result<f64> {
        self.inner.g(rho)
    }

    pub fn evaluate_roof(&self, rho: &DensityMatrix) -> Result<f64> {
        self.inner.roof(rho)
    }
}

/// Name-keyed collection of functionals with their contexts already bound.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, WitnessFunctional>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every shipped functional for qubits, with `H = σ_z` and the Z basis.
    pub fn qubit_defaults() -> Self {
        let z = crate::linalg::pauli::z();
        let mut r = Self::new();
        r.register(WitnessFunctional::wysi(z.clone()));
        r.register(WitnessFunctional::wysi_lower(z.clone()));
        r.register(WitnessFunctional::l2(ReferenceBasis::computational(2)));
        r.register(WitnessFunctional::ergotropy(z));
        r
    }

    /// Adds or replaces the entry under the functional's own name.
    pub fn register(&mut self, f: WitnessFunctional) {
        self.entries.insert(f.name().to_string(), f);
    }

    pub fn get(&self, name: &str) -> Result<&WitnessFunctional> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownFunctional(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &WitnessFunctional> {
        self.entries.values()
    }
}
