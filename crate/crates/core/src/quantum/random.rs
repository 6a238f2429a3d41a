//! Seeded random generators for states, measurements, channels and
//! unsteerable assemblages.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    ho_state_assemblage as ho_from_parts, DensityMatrix, Effect, KrausChannel,
    MeasurementAssemblage, ResponseTable, StateAssemblage,
};
use crate::linalg::{psd_inv_sqrt, ComplexMatrix, HermitianMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("finite Gaussian samples")
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE up to scale).
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(dim, dim, rng);
    HermitianMatrix::symmetrized(&(&g + &g.dagger()).scale(0.5))
}

/// Hilbert-Schmidt random density matrix `GG†/Tr GG†`.
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = HermitianMatrix::symmetrized(&(&g * &g.dagger()));
    let t = m.trace();
    DensityMatrix::from_trusted(m.scale(1.0 / t))
}

/// Haar-random unit vector.
pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random unitary from Gram-Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for q in &cols {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random POVM `S^{-1/2} G_a S^{-1/2}` with `G_a` Wishart and `S = Σ G_a`.
pub fn povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<Effect> {
    let raw: Vec<HermitianMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            HermitianMatrix::symmetrized(&(&g * &g.dagger()))
        })
        .collect();
    let total = raw
        .iter()
        .skip(1)
        .fold(raw[0].clone(), |acc, m| acc.add(m).expect("same dim"));
    let s = psd_inv_sqrt(&total, 1e-14).expect("Wishart sum is full rank");
    raw.iter()
        .map(|g| Effect::from_trusted(g.sandwich(&s).expect("same dim")))
        .collect()
}

pub fn measurement_assemblage<R: Rng + ?Sized>(
    dim: usize,
    settings: usize,
    outcomes: usize,
    rng: &mut R,
) -> MeasurementAssemblage {
    let elements = (0..settings).map(|_| povm(dim, outcomes, rng)).collect();
    MeasurementAssemblage::new(elements).expect("normalized POVMs")
}

/// Uniform point on the probability simplex.
pub fn probability_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

pub fn response_table<R: Rng + ?Sized>(
    settings: usize,
    outcomes: usize,
    hidden: usize,
    rng: &mut R,
) -> ResponseTable {
    let table = (0..settings)
        .map(|_| {
            (0..hidden)
                .map(|_| probability_vector(outcomes, rng))
                .collect()
        })
        .collect();
    ResponseTable::new(table).expect("stochastic")
}

/// Unsteerable assemblage from a random hidden-state ensemble.
pub fn ho_state_assemblage<R: Rng + ?Sized>(
    dim: usize,
    settings: usize,
    outcomes: usize,
    hidden: usize,
    rng: &mut R,
) -> StateAssemblage {
    let weights = probability_vector(hidden, rng);
    let ensemble: Vec<(f64, DensityMatrix)> = weights
        .into_iter()
        .map(|p| (p, density(dim, rng)))
        .collect();
    let response = response_table(settings, outcomes, hidden, rng);
    ho_from_parts(&ensemble, &response).expect("valid ensemble")
}

/// Random channel as the Stiefel block of a Haar unitary.
pub fn channel<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    kraus_rank: usize,
    rng: &mut R,
) -> KrausChannel {
    let n = kraus_rank * dim_out;
    assert!(n >= dim_in, "Kraus rank too small for an isometry");
    let u = unitary(n, rng);
    let ops = (0..kraus_rank)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |r, c| u.get(k * dim_out + r, c)))
        .collect();
    KrausChannel::new(ops).expect("isometry columns")
}
