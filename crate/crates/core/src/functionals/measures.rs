//! Closed-form convex functionals and their concave roofs.

use super::ReferenceBasis;
use crate::error::{Error, Result};
#[cfg(test)]
use crate::linalg::psd_sqrt;
use crate::linalg::{commutator_trace_sq, HermitianMatrix, PSD_TOL};
use crate::quantum::DensityMatrix;

/// Eigenvalues of a unit-trace state at or below this are round-off.
const SPECTRUM_NOISE: f64 = 64.0 * f64::EPSILON;

fn check_dim(rho: &DensityMatrix, dim: usize, what: &str) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::Shape(format!(
            "state has dim {} but {what} has dim {dim}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Wigner-Yanase skew information `Tr ρH² − Tr √ρ H √ρ H`.
///
/// Evaluated in the eigenbasis of `ρ` as `½ Σ_kl (√λ_k − √λ_l)² |H_kl|²`,
/// which avoids the cancellation of the trace form.
pub fn wysi(rho: &DensityMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_dim(rho, h.dim(), "observable")?;
    let e = rho.as_hermitian().eig()?;
    if e.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    // √λ magnifies round-off near zero (1e-16 becomes 1e-8), so eigenvalues
    // indistinguishable from zero are snapped to it.
    let roots: Vec<f64> = e
        .values
        .iter()
        .map(|&l| if l <= SPECTRUM_NOISE { 0.0 } else { l.sqrt() })
        .collect();
    let u = &e.vectors;
    let hk = &(&u.dagger() * h.as_matrix()) * u;
    let n = h.dim();
    let mut total = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            let d = roots[k] - roots[l];
            total += d * d * hk.get(k, l).norm_sqr();
        }
    }
    Ok(total)
}

/// Trace form `Tr ρH² − Tr √ρ H √ρ H`, kept as an independent check.
#[cfg(test)]
fn wysi_trace_form(rho: &DensityMatrix, h: &HermitianMatrix) -> f64 {
    let h2 = HermitianMatrix::symmetrized(&(h.as_matrix() * h.as_matrix()));
    let s = psd_sqrt(rho.as_hermitian()).unwrap();
    let sh = s.as_matrix() * h.as_matrix();
    rho.as_hermitian().trace_product(&h2).unwrap() - (&sh * &sh).trace().re
}

/// Measurable lower bound `I^L = −¼ Tr[ρ,H]²` of the skew information.
pub fn wysi_lower_bound(rho: &DensityMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_dim(rho, h.dim(), "observable")?;
    Ok((-0.25 * commutator_trace_sq(rho.as_hermitian(), h)?).max(0.0))
}

/// `Var(ρ,H) = Tr ρH² − (Tr ρH)²`, the concave roof of the skew information.
pub fn variance(rho: &DensityMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_dim(rho, h.dim(), "observable")?;
    let h2 = HermitianMatrix::symmetrized(&(h.as_matrix() * h.as_matrix()));
    let mean = rho.as_hermitian().trace_product(h)?;
    Ok((rho.as_hermitian().trace_product(&h2)? - mean * mean).max(0.0))
}

/// ℓ2 coherence `Σ_{i≠j} |<i|ρ|j>|²` in the reference basis.
pub fn l2_coherence(rho: &DensityMatrix, basis: &ReferenceBasis) -> Result<f64> {
    check_dim(rho, basis.dim(), "basis")?;
    let r = rho.as_hermitian().conjugate_by(&basis.unitary().dagger())?;
    let m = r.as_matrix();
    let n = basis.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += m.get(i, j).norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Summed variance `Σ_j [Tr ρΠ_j − (Tr ρΠ_j)²]`, the concave roof of ℓ2 coherence.
pub fn summed_variance(rho: &DensityMatrix, basis: &ReferenceBasis) -> Result<f64> {
    check_dim(rho, basis.dim(), "basis")?;
    let mut total = 0.0;
    for p in basis.projectors() {
        let q = rho.as_hermitian().trace_product(p)?;
        total += q - q * q;
    }
    Ok(total.max(0.0))
}

/// Ergotropy by the passive-state formula: `Tr ρH − Σ_k λ_k^↓(ρ) ε_k^↑(H)`.
pub fn ergotropy(rho: &DensityMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_dim(rho, h.dim(), "observable")?;
    let lambdas = rho.as_hermitian().eig()?.values;
    let energies = h.eig()?.values;
    let passive: f64 = lambdas
        .iter()
        .rev()
        .zip(&energies)
        .map(|(l, e)| l * e)
        .sum();
    Ok((rho.as_hermitian().trace_product(h)? - passive).max(0.0))
}

/// `Tr ρH − h_min`, the affine concave roof of the ergotropy.
pub fn ergotropy_pure_roof(rho: &DensityMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_dim(rho, h.dim(), "observable")?;
    let h_min = h.eig()?.min();
    Ok((rho.as_hermitian().trace_product(h)? - h_min).max(0.0))
}
