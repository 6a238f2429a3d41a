//! Random pure-state decompositions of a mixed state.
//!
//! Every decomposition `ρ = Σ_i p_i |ψ_i><ψ_i|` arises from a spectral one
//! through an isometry, `√p_i |ψ_i> = Σ_j U_ij √λ_j |e_j>`. Sampling Haar
//! unitaries therefore explores all decompositions, and the best average of
//! `g` found is a lower bound on the concave roof. It is meant for tests
//! only: feeding it to the witness would underestimate `F_g` and fabricate
//! violations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::WitnessFunctional;
use crate::error::Result;
use crate::linalg::{HermitianMatrix, C64, ZERO};
use crate::quantum::{random, DensityMatrix};

const SUPPORT_CUTOFF: f64 = 1e-14;

/// Best sampled `Σ_i p_i g(ψ_i)` using a mixing dimension of twice the rank.
pub fn roof_sample_lower_bound(
    g: &WitnessFunctional,
    rho: &DensityMatrix,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    roof_sample_lower_bound_with(g, rho, samples, seed, None)
}

/// As [`roof_sample_lower_bound`] with an explicit number of decomposition
/// elements (at least the rank of `ρ`).
pub fn roof_sample_lower_bound_with(
    g: &WitnessFunctional,
    rho: &DensityMatrix,
    samples: usize,
    seed: u64,
    mixing_dim: Option<usize>,
) -> Result<f64> {
    let e = rho.as_hermitian().eig()?;
    let dim = rho.dim();
    let support: Vec<(f64, Vec<C64>)> = (0..dim)
        .filter(|&k| e.values[k] > SUPPORT_CUTOFF)
        .map(|k| (e.values[k].sqrt(), e.vector(k)))
        .collect();
    let rank = support.len();
    if rank <= 1 {
        return g.evaluate_g(rho);
    }
    let k = mixing_dim.unwrap_or(2 * rank).max(rank);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples.max(1) {
        let u = random::unitary(k, &mut rng);
        let mut total = 0.0;
        for i in 0..k {
            let mut psi = vec![ZERO; dim];
            for (j, (s, v)) in support.iter().enumerate() {
                let coeff = u.get(i, j) * *s;
                for (p, vi) in psi.iter_mut().zip(v) {
                    *p += coeff * vi;
                }
            }
            let p: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            if p < SUPPORT_CUTOFF {
                continue;
            }
            let state = DensityMatrix::from_trusted(HermitianMatrix::projector(&psi));
            total += p * g.evaluate_g(&state)?;
        }
        best = best.max(total);
    }
    Ok(best)
}
