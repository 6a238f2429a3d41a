use super::{measurement_incompatibility, seo, violation, OptimizerConfig};
use crate::error::{Error, Result};
use crate::functionals::WitnessFunctional;
use crate::quantum::{
    instrument_from_dilation, minimal_dilation, DensityMatrix, KrausChannel, MeasurementAssemblage,
};

/// Best instrument value found and where it was attained.
#[derive(Debug, Clone)]
pub struct InstrumentOptimum {
    pub value: f64,
    /// Index into the supplied input states.
    pub input_index: usize,
    /// Index into the supplied ancilla measurement family.
    pub family_index: usize,
    /// Optimal `ρ_B` of the measurement search, `None` when the induced
    /// marginal was rank deficient and the state witness was used directly.
    pub rho_b: Option<DensityMatrix>,
}

/// Lower bound on `sup_{ρ_C, M} M_g[B(Λ, V, ρ_C)]` over the given inputs and
/// ancilla measurement family, with `V` the minimal dilation of `channel`.
///
/// For each pair the induced state assemblage `σ_{a|x} = Λ_{a|x}(ρ_C)` is
/// mapped to its steering-equivalent observables, which are then searched
/// over `ρ_B`. When the induced marginal is not full rank the observables
/// are undefined and `S_g(σ)` is used instead; it never exceeds the
/// measurement value. A trivial ancilla yields 0.
pub fn instrument_incompatibility(
    g: &WitnessFunctional,
    channel: &KrausChannel,
    family: &[MeasurementAssemblage],
    inputs: &[DensityMatrix],
    cfg: &OptimizerConfig,
) -> Result<InstrumentOptimum> {
    cfg.validate()?;
    let v = minimal_dilation(channel)?;
    let mut best = InstrumentOptimum {
        value: 0.0,
        input_index: 0,
        family_index: 0,
        rho_b: None,
    };
    if v.dim_anc() == 1 {
        return Ok(best);
    }
    for (j, m) in family.iter().enumerate() {
        if m.dim() != v.dim_anc() {
            return Err(Error::Shape(format!(
                "family member {j} has dim {} but the ancilla has dim {}",
                m.dim(),
                v.dim_anc()
            )));
        }
        let instrument = instrument_from_dilation(&v, m)?;
        for (i, rho_c) in inputs.iter().enumerate() {
            let sigma = instrument.induced_assemblage(rho_c)?;
            let (value, rho_b) = match seo(&sigma, cfg.rank_floor) {
                Ok(b) => {
                    let r = measurement_incompatibility(g, &b, cfg)?;
                    (r.value, Some(r.rho_b))
                }
                Err(Error::SeoUndefined(_)) => (violation(g, &sigma)?.violation, None),
                Err(e) => return Err(e),
            };
            if value > best.value {
                best = InstrumentOptimum {
                    value,
                    input_index: i,
                    family_index: j,
                    rho_b,
                };
            }
        }
    }
    Ok(best)
}
