use crate::error::{Error, Result};
use crate::linalg::{psd_inv_sqrt, psd_sqrt, DEFAULT_RANK_TOL};
use crate::quantum::{DensityMatrix, MeasurementAssemblage, StateAssemblage};

/// Steering-equivalent observables `B_{a|x} = ρ^{-1/2} σ_{a|x} ρ^{-1/2}`.
///
/// Fails with [`Error::SeoUndefined`] when the marginal has an eigenvalue at
/// or below `rank_tol`.
pub fn seo(sigma: &StateAssemblage, rank_tol: f64) -> Result<MeasurementAssemblage> {
    let s = psd_inv_sqrt(sigma.marginal().as_hermitian(), rank_tol)
        .map_err(|e| Error::SeoUndefined(Box::new(e)))?;
    let ops = sigma
        .elements()
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|e| e.as_hermitian().sandwich(&s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementAssemblage::from_operators(ops)
}

/// `σ_{a|x} = √ρ M_{a|x} √ρ`, the state assemblage whose SEO is `M`.
pub fn embed_measurement(
    measurements: &MeasurementAssemblage,
    rho_b: &DensityMatrix,
) -> Result<StateAssemblage> {
    if measurements.dim() != rho_b.dim() {
        return Err(Error::Shape(format!(
            "measurement dim {} but state dim {}",
            measurements.dim(),
            rho_b.dim()
        )));
    }
    let e = rho_b.as_hermitian().eig()?;
    if e.min() <= DEFAULT_RANK_TOL {
        return Err(Error::RankDeficient {
            min_eigenvalue: e.min(),
            tolerance: DEFAULT_RANK_TOL,
        });
    }
    let s = psd_sqrt(rho_b.as_hermitian())?;
    let ops = measurements
        .elements()
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|m| m.as_hermitian().sandwich(&s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    StateAssemblage::from_operators(ops)
}
