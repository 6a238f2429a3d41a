//! Dense complex Hermitian matrix algebra for small dimensions.

mod eigen;
mod matrix;

pub use eigen::{hermitian_eig, Eigen};
pub use matrix::{ComplexMatrix, C64, ONE, ZERO};

use crate::error::{Error, Result};

/// Maximum `|A - A†|` entry accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Default cutoff below which an eigenvalue counts as zero for inversion.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Square matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input, so downstream algebra sees an exactly
/// Hermitian matrix even when the caller's entries carry round-off.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let deviation = m.hermiticity_deviation();
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(A + A†)/2` without a tolerance check.
    pub(crate) fn symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        Self(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(m.get(i, i).re, 0.0)
            } else {
                (m.get(i, j) + m.get(j, i).conj()) * 0.5
            }
        }))
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(dim, dim, data)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(ComplexMatrix::diag_real(values))
    }

    /// Rank-one projector onto the normalized direction of `v`.
    pub fn projector(v: &[C64]) -> Self {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        Self::symmetrized(&ComplexMatrix::outer(v).scale(1.0 / norm_sq))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.try_add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.try_sub(&other.0)?))
    }

    /// Elementwise transpose, which for a Hermitian matrix is its complex conjugate.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `Tr(A B)`; real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        Ok(self.0.trace_product(&other.0)?.re)
    }

    /// `B A B` for Hermitian `B`, symmetrized.
    pub fn sandwich(&self, outer: &Self) -> Result<Self> {
        let inner = outer.0.matmul(&self.0)?.matmul(&outer.0)?;
        Ok(Self::symmetrized(&inner))
    }

    /// `U A U†` for any compatible `U` (possibly rectangular).
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let out = u.matmul(&self.0)?.matmul(&u.dagger())?;
        Ok(Self::symmetrized(&out))
    }

    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        Ok(Self::symmetrized(&e.reconstruct_with(f)))
    }
}

impl std::fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

/// Which factor of a bipartite system to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn psd_sqrt(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = rho.eig()?;
    if e.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(HermitianMatrix::symmetrized(
        &e.reconstruct_with(|l| l.max(0.0).sqrt()),
    ))
}

/// `rho^{-1/2}` for full-rank `rho`.
pub fn psd_inv_sqrt(rho: &HermitianMatrix, rank_tol: f64) -> Result<HermitianMatrix> {
    let e = rho.eig()?;
    if e.min() <= rank_tol {
        return Err(Error::RankDeficient {
            min_eigenvalue: e.min(),
            tolerance: rank_tol,
        });
    }
    Ok(HermitianMatrix::symmetrized(
        &e.reconstruct_with(|l| 1.0 / l.sqrt()),
    ))
}

/// Traces out one factor of a `dim_a * dim_b` operator.
pub fn partial_trace(
    rho: &HermitianMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::symmetrized(&partial_trace_general(
        rho.as_matrix(),
        dim_a,
        dim_b,
        keep,
    )?))
}

pub(crate) fn partial_trace_general(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != dim_a * dim_b {
        return Err(Error::Shape(format!(
            "partial trace of {}x{} over {dim_a}x{dim_b}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match keep {
        Subsystem::B => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a)
                .map(|k| m.get(k * dim_b + i, k * dim_b + j))
                .sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b)
                .map(|k| m.get(i * dim_b + k, j * dim_b + k))
                .sum()
        }),
    })
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// `Tr([A, B]^2)`, which is real and non-positive for Hermitian inputs.
pub fn commutator_trace_sq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    Ok(commutator_trace_sq_complex(a, b)?.re)
}

pub(crate) fn commutator_trace_sq_complex(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "commutator of {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let ab = a.as_matrix().mul_unchecked(b.as_matrix());
    let ba = b.as_matrix().mul_unchecked(a.as_matrix());
    let c = &ab - &ba;
    c.trace_product(&c)
}

pub mod pauli {
    use super::*;

    pub fn x() -> HermitianMatrix {
        HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("static")
    }

    pub fn y() -> HermitianMatrix {
        HermitianMatrix::new(
            ComplexMatrix::new(
                2,
                2,
                vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
            )
            .expect("static"),
        )
        .expect("static")
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus_projector() -> HermitianMatrix {
        HermitianMatrix::projector(&[C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)])
    }

    #[test]
    fn hermiticity_is_enforced() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(rect), Err(Error::Shape(_))));
    }

    #[test]
    fn sqrt_examples() {
        let half = HermitianMatrix::identity(2).scale(0.5);
        let s = psd_sqrt(&half).unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::identity(2).scale(FRAC_1_SQRT_2)) < 1e-14);

        let p = plus_projector();
        assert!(psd_sqrt(&p).unwrap().max_abs_diff(&p) < 1e-12);

        // (1-w)|+><+| + w/2 at w = 0.5 has spectrum {3/4, 1/4} in the X basis.
        let w = 0.5;
        let rho = p.scale(1.0 - w).add(&half.scale(w)).unwrap();
        let e = psd_sqrt(&rho).unwrap().eig().unwrap();
        assert!((e.values[0] - 0.25f64.sqrt()).abs() < 1e-12);
        assert!((e.values[1] - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = HermitianMatrix::diag(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd { .. })));
        // tiny negative eigenvalues are clamped
        assert!(psd_sqrt(&HermitianMatrix::diag(&[1.0, -1e-11])).is_ok());
    }

    #[test]
    fn inverse_sqrt_examples() {
        let half = HermitianMatrix::identity(2).scale(0.5);
        let r = psd_inv_sqrt(&half, DEFAULT_RANK_TOL).unwrap();
        assert!(r.max_abs_diff(&HermitianMatrix::identity(2).scale(2f64.sqrt())) < 1e-12);

        let d = HermitianMatrix::diag(&[0.9, 0.1]);
        let r = psd_inv_sqrt(&d, DEFAULT_RANK_TOL).unwrap();
        let expected = HermitianMatrix::diag(&[1.0 / 0.9f64.sqrt(), 1.0 / 0.1f64.sqrt()]);
        assert!(r.max_abs_diff(&expected) < 1e-12);
        let back = d.sandwich(&r).unwrap();
        assert!(back.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-8);

        let singular = HermitianMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(
            psd_inv_sqrt(&singular, DEFAULT_RANK_TOL),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let rho_a = HermitianMatrix::diag(&[0.3, 0.7]);
        let rho_b = HermitianMatrix::from_real(2, &[0.6, 0.2, 0.2, 0.4]).unwrap();
        let prod = HermitianMatrix::new(kron(rho_a.as_matrix(), rho_b.as_matrix())).unwrap();
        assert!(
            partial_trace(&prod, 2, 2, Subsystem::B)
                .unwrap()
                .max_abs_diff(&rho_b)
                < 1e-15
        );
        assert!(
            partial_trace(&prod, 2, 2, Subsystem::A)
                .unwrap()
                .max_abs_diff(&rho_a)
                < 1e-15
        );
        assert!(matches!(
            partial_trace(&prod, 3, 2, Subsystem::B),
            Err(Error::Shape(_))
        ));

        // sin θ|00> + cos θ|11> at θ = π/6 leaves diag(1/4, 3/4) on B.
        let t = std::f64::consts::PI / 6.0;
        let psi = [C64::new(t.sin(), 0.0), ZERO, ZERO, C64::new(t.cos(), 0.0)];
        let rb = partial_trace(&HermitianMatrix::projector(&psi), 2, 2, Subsystem::B).unwrap();
        assert!(rb.max_abs_diff(&HermitianMatrix::diag(&[0.25, 0.75])) < 1e-12);
    }

    #[test]
    fn commutator_examples() {
        let half = HermitianMatrix::identity(2).scale(0.5);
        assert_eq!(commutator_trace_sq(&half, &pauli::z()).unwrap(), 0.0);
        let diag = HermitianMatrix::diag(&[0.2, 0.8]);
        assert_eq!(commutator_trace_sq(&diag, &pauli::z()).unwrap(), 0.0);
        // [|+><+|, σ_z] = [[0,-1],[1,0]], whose square is -1.
        let v = commutator_trace_sq(&plus_projector(), &pauli::z()).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
        // against the projector |0><0| instead of σ_z the value is a quarter of that
        let p0 = HermitianMatrix::diag(&[1.0, 0.0]);
        let v = commutator_trace_sq(&plus_projector(), &p0).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
        assert!(commutator_trace_sq(&half, &HermitianMatrix::identity(3)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sqrt_squares_back(seed in any::<u64>(), d in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random::density(d, &mut rng);
            let s = psd_sqrt(rho.as_hermitian()).unwrap();
            let sq = s.as_matrix() * s.as_matrix();
            prop_assert!(sq.max_abs_diff(rho.as_hermitian().as_matrix()) < 1e-9);
        }

        #[test]
        fn partial_trace_of_product(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::density(da, &mut rng);
            let b = random::density(db, &mut rng);
            let ab = HermitianMatrix::new(kron(a.as_hermitian().as_matrix(), b.as_hermitian().as_matrix())).unwrap();
            let ra = partial_trace(&ab, da, db, Subsystem::A).unwrap();
            prop_assert!(ra.max_abs_diff(a.as_hermitian()) < 1e-12);
            prop_assert!((ra.trace() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn commutator_square_is_real_nonpositive(seed in any::<u64>(), d in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::hermitian(d, &mut rng);
            let b = random::hermitian(d, &mut rng);
            let z = commutator_trace_sq_complex(&a, &b).unwrap();
            prop_assert!(z.im.abs() <= 1e-12);
            prop_assert!(z.re <= 1e-12);
        }
    }
}
