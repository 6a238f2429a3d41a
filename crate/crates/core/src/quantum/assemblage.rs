use std::f64::consts::FRAC_1_SQRT_2;

use super::{DensityMatrix, Effect, SubnormalizedState, ASSEMBLAGE_TOL, PROB_FLOOR, STATE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64, ZERO};

/// State assemblage `{σ_{a|x}}`: for each setting `x` a list of sub-normalized
/// conditional states indexed by outcome `a`, all sharing one marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAssemblage {
    dim: usize,
    elements: Vec<Vec<SubnormalizedState>>,
}

impl StateAssemblage {
    pub fn new(elements: Vec<Vec<SubnormalizedState>>) -> Result<Self> {
        let dim = validate_shape(elements.iter().map(|s| s.iter().map(|e| e.dim())))?;
        for (x, setting) in elements.iter().enumerate() {
            let total: f64 = setting.iter().map(|s| s.weight()).sum();
            if (total - 1.0).abs() > ASSEMBLAGE_TOL {
                return Err(Error::InvalidAssemblage(format!(
                    "weights of setting {x} sum to {total}"
                )));
            }
        }
        let marginals: Vec<HermitianMatrix> = elements
            .iter()
            .map(|s| sum_hermitian(s.iter().map(|e| e.as_hermitian())))
            .collect::<Result<_>>()?;
        for (x, m) in marginals.iter().enumerate().skip(1) {
            let dev = m.max_abs_diff(&marginals[0]);
            if dev > ASSEMBLAGE_TOL {
                return Err(Error::InvalidAssemblage(format!(
                    "no-signaling violated between settings 0 and {x} (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Self { dim, elements })
    }

    /// Builds from raw sub-normalized operators, validating each.
    pub fn from_operators(ops: Vec<Vec<HermitianMatrix>>) -> Result<Self> {
        let elements = ops
            .into_iter()
            .map(|s| s.into_iter().map(SubnormalizedState::new).collect())
            .collect::<Result<_>>()?;
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> usize {
        self.elements.len()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.elements.iter().map(Vec::len).collect()
    }

    pub fn setting(&self, x: usize) -> Result<&[SubnormalizedState]> {
        self.elements
            .get(x)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidSetting {
                index: x,
                settings: self.settings(),
            })
    }

    pub fn element(&self, x: usize, a: usize) -> &SubnormalizedState {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[Vec<SubnormalizedState>] {
        &self.elements
    }

    /// Shared marginal `ρ = Σ_a σ_{a|0}`.
    pub fn marginal(&self) -> DensityMatrix {
        let sum = sum_hermitian(self.elements[0].iter().map(|e| e.as_hermitian()))
            .expect("validated shapes");
        DensityMatrix::from_trusted(sum.scale(1.0 / sum.trace()))
    }

    /// `t·self + (1-t)·other` on matching index sets.
    pub fn mix(&self, t: f64, other: &Self) -> Result<Self> {
        if self.outcomes() != other.outcomes() || self.dim != other.dim {
            return Err(Error::Shape(
                "mixing assemblages with different index sets".into(),
            ));
        }
        let ops = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(s, o)| {
                s.iter()
                    .zip(o)
                    .map(|(a, b)| {
                        a.as_hermitian()
                            .scale(t)
                            .add(&b.as_hermitian().scale(1.0 - t))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_operators(ops)
    }
}

/// Measurement assemblage `{M_{a|x}}`: one POVM per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssemblage {
    dim: usize,
    elements: Vec<Vec<Effect>>,
}

impl MeasurementAssemblage {
    pub fn new(elements: Vec<Vec<Effect>>) -> Result<Self> {
        let dim = validate_shape(elements.iter().map(|s| s.iter().map(|e| e.dim())))?;
        let identity = HermitianMatrix::identity(dim);
        for (x, setting) in elements.iter().enumerate() {
            let sum = sum_hermitian(setting.iter().map(|e| e.as_hermitian()))?;
            let dev = sum.max_abs_diff(&identity);
            if dev > ASSEMBLAGE_TOL {
                return Err(Error::InvalidAssemblage(format!(
                    "effects of setting {x} do not sum to identity (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Self { dim, elements })
    }

    pub fn from_operators(ops: Vec<Vec<HermitianMatrix>>) -> Result<Self> {
        let elements = ops
            .into_iter()
            .map(|s| s.into_iter().map(Effect::new).collect())
            .collect::<Result<_>>()?;
        Self::new(elements)
    }

    /// Single setting with the trivial POVM `{𝟙}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![vec![Effect::from_trusted(HermitianMatrix::identity(dim))]],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> usize {
        self.elements.len()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.elements.iter().map(Vec::len).collect()
    }

    pub fn element(&self, x: usize, a: usize) -> &Effect {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[Vec<Effect>] {
        &self.elements
    }

    /// Elementwise transpose of every effect.
    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|e| Effect::from_trusted(e.as_hermitian().transpose()))
                        .collect()
                })
                .collect(),
        }
    }

    /// Largest entrywise deviation from another assemblage on the same index set.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.outcomes() != other.outcomes() {
            return f64::INFINITY;
        }
        self.elements
            .iter()
            .flatten()
            .zip(other.elements.iter().flatten())
            .map(|(a, b)| a.as_hermitian().max_abs_diff(b.as_hermitian()))
            .fold(0.0, f64::max)
    }
}

fn validate_shape<I, J>(settings: I) -> Result<usize>
where
    I: Iterator<Item = J>,
    J: Iterator<Item = usize>,
{
    let mut dim = None;
    let mut count = 0;
    for (x, setting) in settings.enumerate() {
        count += 1;
        let mut outcomes = 0;
        for d in setting {
            outcomes += 1;
            match dim {
                None => dim = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::Shape(format!(
                        "setting {x} mixes dimensions {d0} and {d}"
                    )))
                }
                _ => {}
            }
        }
        if outcomes == 0 {
            return Err(Error::InvalidAssemblage(format!(
                "setting {x} has no outcomes"
            )));
        }
    }
    if count == 0 {
        return Err(Error::InvalidAssemblage("no settings".into()));
    }
    Ok(dim.expect("at least one element"))
}

pub(crate) fn sum_hermitian<'a>(
    items: impl IntoIterator<Item = &'a HermitianMatrix>,
) -> Result<HermitianMatrix> {
    let sum = ComplexMatrix::sum(items.into_iter().map(|h| h.as_matrix()))?;
    Ok(HermitianMatrix::symmetrized(&sum))
}

/// Classical response `p(a|x,λ)`, stored as `table[x][λ][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    table: Vec<Vec<Vec<f64>>>,
}

impl ResponseTable {
    pub fn new(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::NotStochastic("no settings".into()));
        }
        let hidden = table[0].len();
        for (x, per_x) in table.iter().enumerate() {
            if per_x.len() != hidden {
                return Err(Error::NotStochastic(format!(
                    "setting {x} has {} hidden values, expected {hidden}",
                    per_x.len()
                )));
            }
            let outcomes = per_x.first().map_or(0, Vec::len);
            for (l, column) in per_x.iter().enumerate() {
                if column.len() != outcomes || outcomes == 0 {
                    return Err(Error::NotStochastic(format!(
                        "ragged outcome list at x={x}, λ={l}"
                    )));
                }
                check_distribution(column, &format!("p(·|x={x},λ={l})"))?;
            }
        }
        Ok(Self { table })
    }

    /// Response that outputs `a = λ` in every setting.
    pub fn identity(settings: usize, outcomes: usize) -> Self {
        let per_x = (0..outcomes)
            .map(|l| {
                (0..outcomes)
                    .map(|a| if a == l { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        Self {
            table: vec![per_x; settings],
        }
    }

    pub fn settings(&self) -> usize {
        self.table.len()
    }

    pub fn hidden(&self) -> usize {
        self.table[0].len()
    }

    pub fn outcomes(&self, x: usize) -> usize {
        self.table[x][0].len()
    }

    pub fn prob(&self, a: usize, x: usize, lambda: usize) -> f64 {
        self.table[x][lambda][a]
    }
}

pub(crate) fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&v| !v.is_finite() || v < -PROB_FLOOR) {
        return Err(Error::NotStochastic(format!("{what} has a negative entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > ASSEMBLAGE_TOL {
        return Err(Error::NotStochastic(format!("{what} sums to {total}")));
    }
    Ok(())
}

/// `σ_{a|x} = Tr_A[(M_{a|x} ⊗ 𝟙) ρ_AB]`.
pub fn conditional_assemblage(
    rho_ab: &DensityMatrix,
    measurements: &MeasurementAssemblage,
    dim_a: usize,
    dim_b: usize,
) -> Result<StateAssemblage> {
    if measurements.dim() != dim_a || rho_ab.dim() != dim_a * dim_b {
        return Err(Error::Shape(format!(
            "measurement dim {} and state dim {} do not match {dim_a}x{dim_b}",
            measurements.dim(),
            rho_ab.dim()
        )));
    }
    let rho = rho_ab.as_matrix();
    let ops = measurements
        .elements()
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|effect| {
                    let m = effect.as_matrix();
                    let out = ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
                        let mut acc = ZERO;
                        for k in 0..dim_a {
                            for l in 0..dim_a {
                                let mkl = m.get(k, l);
                                if mkl != ZERO {
                                    acc += mkl * rho.get(l * dim_b + i, k * dim_b + j);
                                }
                            }
                        }
                        acc
                    });
                    HermitianMatrix::symmetrized(&out)
                })
                .collect()
        })
        .collect();
    StateAssemblage::from_operators(ops)
}

/// Two noisy qubit Pauli measurements `M_{a|x} = (1-w)Π_{a|x} + w𝟙/2`,
/// setting 0 = Z, setting 1 = X.
pub fn noisy_pauli_assemblage(w: f64) -> Result<MeasurementAssemblage> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::OutOfRange {
            name: "w",
            value: w,
            min: 0.0,
            max: 1.0,
        });
    }
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let one = C64::new(1.0, 0.0);
    let projectors = [
        [
            HermitianMatrix::projector(&[one, ZERO]),
            HermitianMatrix::projector(&[ZERO, one]),
        ],
        [
            HermitianMatrix::projector(&[h, h]),
            HermitianMatrix::projector(&[h, -h]),
        ],
    ];
    let noise = HermitianMatrix::identity(2).scale(w / 2.0);
    let elements = projectors
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|p| Effect::from_trusted(p.scale(1.0 - w).add(&noise).expect("2x2")))
                .collect()
        })
        .collect();
    MeasurementAssemblage::new(elements)
}

/// `|φ(θ)> = sin θ|00> + cos θ|11>`.
pub fn pure_state_family(theta: f64) -> DensityMatrix {
    let psi = [
        C64::new(theta.sin(), 0.0),
        ZERO,
        ZERO,
        C64::new(theta.cos(), 0.0),
    ];
    DensityMatrix::from_trusted(HermitianMatrix::projector(&psi))
}

/// `Σ_i |ii>/√d`.
pub fn maximally_entangled(dim: usize) -> DensityMatrix {
    let mut psi = vec![ZERO; dim * dim];
    for i in 0..dim {
        psi[i * dim + i] = C64::new(1.0, 0.0);
    }
    DensityMatrix::from_trusted(HermitianMatrix::projector(&psi))
}

/// `σ_{a|x} = Σ_λ p(λ) p(a|x,λ) ρ_λ`, unsteerable by construction.
pub fn ho_state_assemblage(
    ensemble: &[(f64, DensityMatrix)],
    response: &ResponseTable,
) -> Result<StateAssemblage> {
    let weights: Vec<f64> = ensemble.iter().map(|(p, _)| *p).collect();
    check_distribution(&weights, "hidden-state distribution")?;
    if response.hidden() != ensemble.len() {
        return Err(Error::Shape(format!(
            "{} hidden states but response table has {}",
            ensemble.len(),
            response.hidden()
        )));
    }
    let ops = (0..response.settings())
        .map(|x| {
            (0..response.outcomes(x))
                .map(|a| {
                    let terms: Vec<HermitianMatrix> = ensemble
                        .iter()
                        .enumerate()
                        .map(|(l, (p, rho))| rho.as_hermitian().scale(p * response.prob(a, x, l)))
                        .collect();
                    sum_hermitian(&terms)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    StateAssemblage::from_operators(ops)
}

/// `M_{a|x} = Σ_λ p(a|x,λ) G_λ`, jointly measurable by construction.
pub fn compatible_measurement(
    parent: &[Effect],
    response: &ResponseTable,
) -> Result<MeasurementAssemblage> {
    let sum = sum_hermitian(parent.iter().map(|g| g.as_hermitian()))?;
    let dev = sum.max_abs_diff(&HermitianMatrix::identity(sum.dim()));
    if dev > ASSEMBLAGE_TOL {
        return Err(Error::InvalidEffect(format!(
            "parent is not a POVM (deviation {dev:.3e})"
        )));
    }
    if response.hidden() != parent.len() {
        return Err(Error::Shape(format!(
            "{} parent effects but response table has {}",
            parent.len(),
            response.hidden()
        )));
    }
    let ops = (0..response.settings())
        .map(|x| {
            (0..response.outcomes(x))
                .map(|a| {
                    let terms: Vec<HermitianMatrix> = parent
                        .iter()
                        .enumerate()
                        .map(|(l, g)| g.as_hermitian().scale(response.prob(a, x, l)))
                        .collect();
                    sum_hermitian(&terms)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementAssemblage::from_operators(ops)
}

/// Rank-one refinement of a measurement assemblage.
#[derive(Debug, Clone)]
pub struct FineGrained {
    pub assemblage: MeasurementAssemblage,
    /// `labels[x][k] = (a, i)`: fine outcome `k` of setting `x` is the
    /// `i`-th spectral piece of coarse effect `M_{a|x}`.
    pub labels: Vec<Vec<(usize, usize)>>,
}

impl FineGrained {
    /// Sums fine effects sharing a coarse label.
    pub fn coarse_grain(&self) -> Result<MeasurementAssemblage> {
        let ops = self
            .labels
            .iter()
            .enumerate()
            .map(|(x, labels)| {
                let outcomes = labels.iter().map(|&(a, _)| a + 1).max().unwrap_or(0);
                (0..outcomes)
                    .map(|a| {
                        let terms: Vec<&HermitianMatrix> = labels
                            .iter()
                            .enumerate()
                            .filter(|(_, l)| l.0 == a)
                            .map(|(k, _)| self.assemblage.element(x, k).as_hermitian())
                            .collect();
                        if terms.is_empty() {
                            Ok(HermitianMatrix::diag(&vec![0.0; self.assemblage.dim()]))
                        } else {
                            sum_hermitian(terms)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementAssemblage::from_operators(ops)
    }
}

/// Splits every effect into rank-one spectral pieces `μ_i |v_i><v_i|`,
/// dropping pieces whose trace falls below [`PROB_FLOOR`].
pub fn fine_grain(measurements: &MeasurementAssemblage) -> Result<FineGrained> {
    let mut elements = Vec::with_capacity(measurements.settings());
    let mut labels = Vec::with_capacity(measurements.settings());
    for setting in measurements.elements() {
        let mut fine = Vec::new();
        let mut fine_labels = Vec::new();
        for (a, effect) in setting.iter().enumerate() {
            let e = effect.as_hermitian().eig()?;
            // descending, so the dominant piece gets index 0
            for (i, k) in (0..e.values.len()).rev().enumerate() {
                let mu = e.values[k];
                if mu < PROB_FLOOR {
                    continue;
                }
                let v = e.vector(k);
                let piece = HermitianMatrix::projector(&v).scale(mu.min(1.0 + STATE_TOL));
                fine.push(Effect::from_trusted(piece));
                fine_labels.push((a, i));
            }
        }
        elements.push(fine);
        labels.push(fine_labels);
    }
    Ok(FineGrained {
        assemblage: MeasurementAssemblage::new(elements)?,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, Subsystem};
    use crate::quantum::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn noisy_pauli_endpoints() {
        let m0 = noisy_pauli_assemblage(0.0).unwrap();
        assert!(
            m0.element(0, 0)
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::diag(&[1.0, 0.0]))
                < 1e-15
        );
        let plus = HermitianMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(m0.element(1, 0).as_hermitian().max_abs_diff(&plus) < 1e-15);
        let m1 = noisy_pauli_assemblage(1.0).unwrap();
        let half = HermitianMatrix::identity(2).scale(0.5);
        for x in 0..2 {
            for a in 0..2 {
                assert!(m1.element(x, a).as_hermitian().max_abs_diff(&half) < 1e-15);
            }
        }
        assert!(noisy_pauli_assemblage(1.5).is_err());
        assert!(noisy_pauli_assemblage(-0.1).is_err());
    }

    #[test]
    fn pure_family_marginals() {
        let prod = pure_state_family(0.0);
        assert!(
            prod.as_hermitian()
                .max_abs_diff(&HermitianMatrix::diag(&[0.0, 0.0, 0.0, 1.0]))
                < 1e-15
        );
        let me = partial_trace(
            pure_state_family(PI / 4.0).as_hermitian(),
            2,
            2,
            Subsystem::B,
        )
        .unwrap();
        assert!(me.max_abs_diff(&HermitianMatrix::identity(2).scale(0.5)) < 1e-15);
        let third = partial_trace(
            pure_state_family(PI / 3.0).as_hermitian(),
            2,
            2,
            Subsystem::B,
        )
        .unwrap();
        assert!(third.max_abs_diff(&HermitianMatrix::diag(&[0.75, 0.25])) < 1e-12);
    }

    #[test]
    fn conditional_on_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ra = random::density(2, &mut rng);
        let rb = random::density(3, &mut rng);
        let ab =
            DensityMatrix::new(HermitianMatrix::new(ra.as_matrix().kron(rb.as_matrix())).unwrap())
                .unwrap();
        let m = random::measurement_assemblage(2, 2, 3, &mut rng);
        let s = conditional_assemblage(&ab, &m, 2, 3).unwrap();
        for x in 0..2 {
            for a in 0..3 {
                let p = ra
                    .as_hermitian()
                    .trace_product(m.element(x, a).as_hermitian())
                    .unwrap();
                let expected = rb.as_hermitian().scale(p);
                assert!(s.element(x, a).as_hermitian().max_abs_diff(&expected) < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_maximally_entangled_pauli() {
        let s = conditional_assemblage(
            &pure_state_family(PI / 4.0),
            &noisy_pauli_assemblage(0.0).unwrap(),
            2,
            2,
        )
        .unwrap();
        let m = noisy_pauli_assemblage(0.0).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let expected = m.element(x, a).as_hermitian().scale(0.5);
                assert!(s.element(x, a).as_hermitian().max_abs_diff(&expected) < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_partial_entanglement_z() {
        let s = conditional_assemblage(
            &pure_state_family(PI / 6.0),
            &noisy_pauli_assemblage(0.0).unwrap(),
            2,
            2,
        )
        .unwrap();
        assert!(
            s.element(0, 0)
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::diag(&[0.25, 0.0]))
                < 1e-12
        );
        assert!(
            s.element(0, 1)
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::diag(&[0.0, 0.75]))
                < 1e-12
        );
    }

    #[test]
    fn conditional_shape_errors() {
        let m = noisy_pauli_assemblage(0.0).unwrap();
        assert!(conditional_assemblage(&pure_state_family(0.3), &m, 2, 3).is_err());
        assert!(conditional_assemblage(&pure_state_family(0.3), &m, 4, 1).is_err());
    }

    #[test]
    fn no_signaling_is_enforced() {
        let a = HermitianMatrix::diag(&[0.5, 0.0]);
        let b = HermitianMatrix::diag(&[0.0, 0.5]);
        let c = HermitianMatrix::diag(&[0.6, 0.0]);
        let d = HermitianMatrix::diag(&[0.0, 0.4]);
        let err = StateAssemblage::from_operators(vec![vec![a, b], vec![c, d]]).unwrap_err();
        assert!(matches!(err, Error::InvalidAssemblage(_)));
    }

    #[test]
    fn ho_examples() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let det = ResponseTable::new(vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]]).unwrap();
        let s = ho_state_assemblage(&[(1.0, rho.clone())], &det).unwrap();
        assert!(
            s.element(0, 0)
                .as_hermitian()
                .max_abs_diff(rho.as_hermitian())
                < 1e-15
        );
        assert_eq!(s.element(0, 1).weight(), 0.0);
        assert!(
            s.element(1, 1)
                .as_hermitian()
                .max_abs_diff(rho.as_hermitian())
                < 1e-15
        );

        let parents = [
            (0.5, DensityMatrix::basis(2, 0)),
            (0.5, DensityMatrix::basis(2, 1)),
        ];
        let s = ho_state_assemblage(&parents, &ResponseTable::identity(2, 2)).unwrap();
        assert!(
            s.marginal()
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::identity(2).scale(0.5))
                < 1e-15
        );

        assert!(ho_state_assemblage(&[(0.7, rho.clone())], &det).is_err());
        assert!(ResponseTable::new(vec![vec![vec![0.6, 0.6]]]).is_err());
        assert!(ResponseTable::new(vec![vec![vec![1.2, -0.2]]]).is_err());
    }

    #[test]
    fn ho_random_no_signaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let s = random::ho_state_assemblage(3, 3, 3, 3, &mut rng);
            let m0 = sum_hermitian(s.setting(0).unwrap().iter().map(|e| e.as_hermitian())).unwrap();
            for x in 1..3 {
                let mx =
                    sum_hermitian(s.setting(x).unwrap().iter().map(|e| e.as_hermitian())).unwrap();
                assert!(mx.max_abs_diff(&m0) < 1e-12);
            }
        }
    }

    #[test]
    fn compatible_reproduces_parent() {
        let z = noisy_pauli_assemblage(0.0).unwrap();
        let parent: Vec<Effect> = z.elements()[0].clone();
        let m = compatible_measurement(&parent, &ResponseTable::identity(2, 2)).unwrap();
        for x in 0..2 {
            for (a, p) in parent.iter().enumerate() {
                assert!(
                    m.element(x, a)
                        .as_hermitian()
                        .max_abs_diff(p.as_hermitian())
                        < 1e-15
                );
            }
        }
        let bad = [Effect::new(HermitianMatrix::diag(&[1.0, 0.0])).unwrap()];
        let single = ResponseTable::new(vec![vec![vec![1.0]]]).unwrap();
        assert!(compatible_measurement(&bad, &single).is_err());
    }

    #[test]
    fn fine_grain_examples() {
        let exact = noisy_pauli_assemblage(0.0).unwrap();
        let f = fine_grain(&exact).unwrap();
        assert_eq!(f.assemblage.outcomes(), vec![2, 2]);
        assert!(f.assemblage.max_abs_diff(&exact) < 1e-12);

        let trivial = fine_grain(&MeasurementAssemblage::trivial(2)).unwrap();
        assert_eq!(trivial.assemblage.outcomes(), vec![2]);
        for k in 0..2 {
            let e = trivial.assemblage.element(0, k).as_hermitian();
            assert!((e.trace() - 1.0).abs() < 1e-12);
        }

        let noisy = noisy_pauli_assemblage(0.5).unwrap();
        let f = fine_grain(&noisy).unwrap();
        assert_eq!(f.assemblage.outcomes(), vec![4, 4]);
        let weights: Vec<f64> = (0..4)
            .map(|k| f.assemblage.element(0, k).as_hermitian().trace())
            .collect();
        for (w, expected) in weights.iter().zip([0.75, 0.25, 0.75, 0.25]) {
            assert!((w - expected).abs() < 1e-12);
        }
        assert_eq!(f.labels[0], vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(f.coarse_grain().unwrap().max_abs_diff(&noisy) < 1e-9);
    }

    #[test]
    fn fine_grain_random_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random::measurement_assemblage(3, 2, 3, &mut rng);
        let f = fine_grain(&m).unwrap();
        for s in f.assemblage.elements() {
            for e in s {
                let ev = e.as_hermitian().eig().unwrap();
                assert!(ev.values.iter().filter(|&&l| l > 1e-9).count() <= 1);
            }
        }
        assert!(f.coarse_grain().unwrap().max_abs_diff(&m) < 1e-9);
    }
}
