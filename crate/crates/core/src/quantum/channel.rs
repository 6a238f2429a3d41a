use super::{DensityMatrix, MeasurementAssemblage, StateAssemblage, ASSEMBLAGE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64, ZERO};

/// Choi eigenvalues at or below this count as zero when reducing Kraus rank.
pub const CHOI_RANK_CUTOFF: f64 = 1e-10;

/// Choi matrix `Σ_k |K_k>><<K_k|`, with `|K>>` indexed as `i * dim_out + r`.
fn choi_of(ops: &[ComplexMatrix], dim_in: usize, dim_out: usize) -> HermitianMatrix {
    let n = dim_in * dim_out;
    let mut j = ComplexMatrix::zeros(n, n);
    for k in ops {
        let v: Vec<C64> = (0..n)
            .map(|idx| k.get(idx % dim_out, idx / dim_out))
            .collect();
        j = &j + &ComplexMatrix::outer(&v);
    }
    HermitianMatrix::symmetrized(&j)
}

fn apply_kraus(ops: &[ComplexMatrix], rho: &ComplexMatrix, dim_out: usize) -> HermitianMatrix {
    let mut out = ComplexMatrix::zeros(dim_out, dim_out);
    for k in ops {
        out = &out + &(&(k * rho) * &k.dagger());
    }
    HermitianMatrix::symmetrized(&out)
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Shape("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if ops
            .iter()
            .any(|k| k.rows() != dim_out || k.cols() != dim_in)
        {
            return Err(Error::Shape("Kraus operators differ in shape".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &ops {
            sum = &sum + &(&k.dagger() * k);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if deviation > ASSEMBLAGE_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self {
            dim_in,
            dim_out,
            ops,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::Shape(format!(
                "channel input dim {} but state dim {}",
                self.dim_in,
                rho.dim()
            )));
        }
        Ok(DensityMatrix::from_trusted(apply_kraus(
            &self.ops,
            rho.as_matrix(),
            self.dim_out,
        )))
    }

    pub fn choi(&self) -> HermitianMatrix {
        choi_of(&self.ops, self.dim_in, self.dim_out)
    }
}

/// Qubit amplitude damping: `K0 = diag(1, √(1-γ))`, `K1 = √γ |0><1|`.
pub fn amplitude_damping_kraus(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            min: 0.0,
            max: 1.0,
        });
    }
    let k0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
    let k1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
    KrausChannel::new(vec![k0, k1])
}

/// Stinespring isometry `V: C^{d_in} -> C^{d_anc} ⊗ C^{d_out}` (ancilla first).
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    dim_in: usize,
    dim_anc: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl Isometry {
    pub fn new(matrix: ComplexMatrix, dim_anc: usize, dim_out: usize) -> Result<Self> {
        if matrix.rows() != dim_anc * dim_out {
            return Err(Error::Shape(format!(
                "isometry has {} rows, expected {dim_anc}x{dim_out}",
                matrix.rows()
            )));
        }
        let dim_in = matrix.cols();
        let gram = &matrix.dagger() * &matrix;
        let deviation = gram.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if deviation > ASSEMBLAGE_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self {
            dim_in,
            dim_anc,
            dim_out,
            matrix,
        })
    }

    /// `V = Σ_i |i> ⊗ K_i`.
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Shape("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let r = ops.len();
        let matrix = ComplexMatrix::from_fn(r * dim_out, dim_in, |row, col| {
            ops[row / dim_out].get(row % dim_out, col)
        });
        Self::new(matrix, r, dim_out)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_anc(&self) -> usize {
        self.dim_anc
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The Kraus operators `K_i = (<i| ⊗ 𝟙) V`.
    pub fn kraus(&self) -> Vec<ComplexMatrix> {
        (0..self.dim_anc)
            .map(|i| {
                ComplexMatrix::from_fn(self.dim_out, self.dim_in, |r, c| {
                    self.matrix.get(i * self.dim_out + r, c)
                })
            })
            .collect()
    }

    /// `V ρ V†` on ancilla ⊗ output.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(
            rho.as_hermitian().conjugate_by(&self.matrix)?,
        ))
    }
}

/// Minimal Stinespring dilation from the Choi spectrum.
///
/// Canonical Kraus operators are the reshaped Choi eigenvectors scaled by
/// `√λ`, ordered by descending eigenvalue, with the phase fixed so the first
/// largest-modulus entry of each operator is real and positive.
pub fn minimal_dilation(channel: &KrausChannel) -> Result<Isometry> {
    let (dim_in, dim_out) = (channel.dim_in, channel.dim_out);
    let e = channel.choi().eig()?;
    let mut ops = Vec::new();
    for k in (0..e.values.len()).rev() {
        let lambda = e.values[k];
        if lambda <= CHOI_RANK_CUTOFF {
            break;
        }
        let v = e.vector(k);
        let s = lambda.sqrt();
        let op = ComplexMatrix::from_fn(dim_out, dim_in, |r, i| v[i * dim_out + r] * s);
        ops.push(fix_phase(op));
    }
    Isometry::from_kraus(&ops)
}

fn fix_phase(op: ComplexMatrix) -> ComplexMatrix {
    let max = op.max_abs();
    let pivot = op
        .entries()
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .unwrap_or(ZERO);
    if pivot == ZERO {
        return op;
    }
    let phase = pivot.conj() / pivot.norm();
    op.scale_complex(phase)
}

/// Instrument assemblage `{Λ_{a|x}}` with each element in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentAssemblage {
    dim_in: usize,
    dim_out: usize,
    elements: Vec<Vec<Vec<ComplexMatrix>>>,
}

impl InstrumentAssemblage {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        elements: Vec<Vec<Vec<ComplexMatrix>>>,
    ) -> Result<Self> {
        if elements.is_empty() || elements.iter().any(Vec::is_empty) {
            return Err(Error::InvalidAssemblage(
                "instrument needs settings and outcomes".into(),
            ));
        }
        for k in elements.iter().flatten().flatten() {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let marginals: Vec<HermitianMatrix> = elements
            .iter()
            .map(|setting| {
                let all: Vec<ComplexMatrix> = setting.iter().flatten().cloned().collect();
                choi_of(&all, dim_in, dim_out)
            })
            .collect();
        // Tr_out J = 𝟙_in is trace preservation of the marginal channel.
        let reduced = crate::linalg::partial_trace(
            &marginals[0],
            dim_in,
            dim_out,
            crate::linalg::Subsystem::A,
        )?;
        let deviation = reduced.max_abs_diff(&HermitianMatrix::identity(dim_in));
        if deviation > ASSEMBLAGE_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        for (x, m) in marginals.iter().enumerate().skip(1) {
            let dev = m.max_abs_diff(&marginals[0]);
            if dev > ASSEMBLAGE_TOL {
                return Err(Error::InvalidAssemblage(format!(
                    "marginal channel of setting {x} differs from setting 0 (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            elements,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn settings(&self) -> usize {
        self.elements.len()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.elements.iter().map(Vec::len).collect()
    }

    pub fn kraus(&self, x: usize, a: usize) -> &[ComplexMatrix] {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[Vec<Vec<ComplexMatrix>>] {
        &self.elements
    }

    pub fn choi(&self, x: usize, a: usize) -> HermitianMatrix {
        choi_of(&self.elements[x][a], self.dim_in, self.dim_out)
    }

    /// `Λ_{a|x}(ρ)`.
    pub fn apply(&self, x: usize, a: usize, rho: &DensityMatrix) -> HermitianMatrix {
        apply_kraus(&self.elements[x][a], rho.as_matrix(), self.dim_out)
    }

    /// The marginal channel `Σ_a Λ_{a|0}`.
    pub fn marginal_channel(&self) -> Result<KrausChannel> {
        KrausChannel::new(self.elements[0].iter().flatten().cloned().collect())
    }

    /// State assemblage `{Λ_{a|x}(ρ)}` produced on a fixed input.
    pub fn induced_assemblage(&self, rho: &DensityMatrix) -> Result<StateAssemblage> {
        if rho.dim() != self.dim_in {
            return Err(Error::Shape(format!(
                "instrument input dim {} but state dim {}",
                self.dim_in,
                rho.dim()
            )));
        }
        let ops = (0..self.settings())
            .map(|x| {
                (0..self.elements[x].len())
                    .map(|a| self.apply(x, a, rho))
                    .collect()
            })
            .collect();
        StateAssemblage::from_operators(ops)
    }
}

/// `Λ_{a|x}(ρ) = Tr_anc[(M_{a|x} ⊗ 𝟙) V ρ V†]`.
///
/// Each element gets Kraus operators `√μ (<e| ⊗ 𝟙) V` from the spectral
/// decomposition `M_{a|x} = Σ μ |e><e|`.
pub fn instrument_from_dilation(
    v: &Isometry,
    measurements: &MeasurementAssemblage,
) -> Result<InstrumentAssemblage> {
    if measurements.dim() != v.dim_anc {
        return Err(Error::Shape(format!(
            "ancilla dim {} but measurement dim {}",
            v.dim_anc,
            measurements.dim()
        )));
    }
    let (d_out, d_in) = (v.dim_out, v.dim_in);
    let elements = measurements
        .elements()
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|effect| {
                    let e = effect.as_hermitian().eig()?;
                    let mut ops = Vec::new();
                    for (k, &mu) in e.values.iter().enumerate() {
                        if mu <= 1e-14 {
                            continue;
                        }
                        let vec = e.vector(k);
                        let s = mu.sqrt();
                        ops.push(ComplexMatrix::from_fn(d_out, d_in, |r, c| {
                            let mut acc = ZERO;
                            for (i, vi) in vec.iter().enumerate() {
                                acc += vi.conj() * v.matrix.get(i * d_out + r, c);
                            }
                            acc * s
                        }));
                    }
                    if ops.is_empty() {
                        ops.push(ComplexMatrix::zeros(d_out, d_in));
                    }
                    Ok(ops)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    InstrumentAssemblage::new(d_in, d_out, elements)
}
