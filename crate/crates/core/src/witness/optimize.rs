//! Search over full-rank `ρ_B` for the steering-induced measurement monotone
//! `M_g(M) = sup_ρ S_g(√ρ M √ρ)`.
//!
//! Stage one evaluates a deterministic candidate set: a Bloch-ball grid for
//! qubits, or seeded Halton points in a matrix-exponential chart for larger
//! dimensions. Stage two refines the best candidates with Nelder-Mead in the
//! same chart. The result is a lower bound on the supremum.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{embed_measurement, violation};
use crate::error::{Error, Result};
use crate::functionals::WitnessFunctional;
use crate::linalg::{pauli, HermitianMatrix, C64, DEFAULT_RANK_TOL};
use crate::par::{map_indexed, Parallelism};
use crate::quantum::{DensityMatrix, MeasurementAssemblage};

/// Number of best grid candidates that get refined.
const REFINE_STARTS: usize = 3;
/// Range of each Hermitian generator entry in the general-dimension chart.
const GENERATOR_SCALE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Points per axis of the qubit Bloch grid; for `d > 2` the candidate
    /// count is `grid_resolution³`.
    pub grid_resolution: usize,
    pub refine_iterations: u64,
    /// Standard-deviation tolerance of the simplex.
    pub tolerance: f64,
    pub seed: u64,
    /// Smallest eigenvalue allowed for candidate states.
    pub rank_floor: f64,
    pub parallelism: Parallelism,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 9,
            refine_iterations: 200,
            tolerance: 1e-10,
            seed: 0,
            rank_floor: 1e-6,
            parallelism: Parallelism::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 2 {
            return Err(Error::OutOfRange {
                name: "grid_resolution",
                value: self.grid_resolution as f64,
                min: 2.0,
                max: f64::INFINITY,
            });
        }
        if !(self.rank_floor > DEFAULT_RANK_TOL && self.rank_floor < 0.5) {
            return Err(Error::OutOfRange {
                name: "rank_floor",
                value: self.rank_floor,
                min: DEFAULT_RANK_TOL,
                max: 0.5,
            });
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::OutOfRange {
                name: "tolerance",
                value: self.tolerance,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// Best state found and its value.
#[derive(Debug, Clone)]
pub struct MeasurementOptimum {
    /// `max(margin, 0)`.
    pub value: f64,
    /// Signed witness margin at `rho_b`.
    pub margin: f64,
    pub rho_b: DensityMatrix,
}

/// A chart from real parameter vectors to full-rank density matrices.
trait Chart: Sync {
    fn state(&self, params: &[f64]) -> DensityMatrix;
    fn candidates(&self, cfg: &OptimizerConfig) -> Vec<Vec<f64>>;
    /// Initial simplex edge length around a candidate.
    fn step(&self, cfg: &OptimizerConfig) -> f64;
}

/// Bloch ball, radius clipped to `1 − 2ε` so both eigenvalues stay `≥ ε`.
struct BlochChart {
    r_max: f64,
}

impl Chart for BlochChart {
    fn state(&self, p: &[f64]) -> DensityMatrix {
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let s = if norm > self.r_max {
            self.r_max / norm
        } else {
            1.0
        };
        let (x, y, z) = (p[0] * s, p[1] * s, p[2] * s);
        let m = HermitianMatrix::identity(2)
            .add(&pauli::x().scale(x))
            .and_then(|m| m.add(&pauli::y().scale(y)))
            .and_then(|m| m.add(&pauli::z().scale(z)))
            .expect("2x2");
        DensityMatrix::from_trusted(m.scale(0.5))
    }

    fn candidates(&self, cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
        let n = cfg.grid_resolution;
        let coord = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let mut out = vec![vec![0.0; 3]];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = [coord(i), coord(j), coord(k)];
                    let r2: f64 = p.iter().map(|v| v * v).sum();
                    if r2 <= 1.0 + 1e-12 {
                        out.push(p.iter().map(|v| v * self.r_max).collect());
                    }
                }
            }
        }
        out
    }

    fn step(&self, cfg: &OptimizerConfig) -> f64 {
        1.0 / (cfg.grid_resolution - 1) as f64
    }
}

/// `ρ = (1 − dε) e^A / Tr e^A + ε𝟙` with `A` Hermitian and `d²` real parameters.
struct ExpChart {
    dim: usize,
    floor: f64,
}

impl ExpChart {
    fn generator(&self, p: &[f64]) -> HermitianMatrix {
        let d = self.dim;
        let mut idx = 0;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = C64::new(p[idx], 0.0);
            idx += 1;
        }
        for i in 0..d {
            for j in i + 1..d {
                let z = C64::new(p[idx], p[idx + 1]);
                idx += 2;
                data[i * d + j] = z;
                data[j * d + i] = z.conj();
            }
        }
        HermitianMatrix::symmetrized(
            &crate::linalg::ComplexMatrix::new(d, d, data).expect("finite parameters"),
        )
    }
}

impl Chart for ExpChart {
    fn state(&self, p: &[f64]) -> DensityMatrix {
        let a = self.generator(p);
        let shift = a.eig().map(|e| e.max()).unwrap_or(0.0);
        let ex = a.map_spectrum(|l| (l - shift).exp()).expect("Hermitian");
        let t = ex.trace();
        let d = self.dim as f64;
        let m = ex
            .scale((1.0 - d * self.floor) / t)
            .add(&HermitianMatrix::identity(self.dim).scale(self.floor))
            .expect("same dim");
        DensityMatrix::from_trusted(m)
    }

    fn candidates(&self, cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
        let n_params = self.dim * self.dim;
        let count = cfg.grid_resolution.pow(3);
        let primes = first_primes(n_params);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let shift: Vec<f64> = (0..n_params).map(|_| rng.random::<f64>()).collect();
        let mut out = vec![vec![0.0; n_params]];
        for i in 1..=count {
            out.push(
                primes
                    .iter()
                    .zip(&shift)
                    .map(|(&b, s)| {
                        let u = (radical_inverse(i as u64, b) + s).fract();
                        GENERATOR_SCALE * (2.0 * u - 1.0)
                    })
                    .collect(),
            );
        }
        out
    }

    fn step(&self, _: &OptimizerConfig) -> f64 {
        0.5
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

struct Objective<'a, C: Chart> {
    chart: &'a C,
    g: &'a WitnessFunctional,
    measurements: &'a MeasurementAssemblage,
}

impl<C: Chart> Objective<'_, C> {
    fn margin(&self, p: &[f64]) -> f64 {
        let rho = self.chart.state(p);
        embed_measurement(self.measurements, &rho)
            .and_then(|s| violation(self.g, &s))
            .map(|r| r.margin)
            .unwrap_or(f64::NEG_INFINITY)
    }
}

impl<C: Chart> CostFunction for Objective<'_, C> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let m = self.margin(p);
        Ok(if m.is_finite() { -m } else { f64::MAX })
    }
}

fn refine<C: Chart>(
    obj: &Objective<'_, C>,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<f64>> {
    let step = obj.chart.step(cfg);
    let mut simplex = vec![start.to_vec()];
    for k in 0..start.len() {
        let mut v = start.to_vec();
        v[k] += if v[k] > 0.0 { -step } else { step };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(cfg.tolerance)
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let res = Executor::new(
        Objective {
            chart: obj.chart,
            g: obj.g,
            measurements: obj.measurements,
        },
        solver,
    )
    .configure(|s| s.max_iters(cfg.refine_iterations))
    .run()
    .map_err(|e| Error::Optimizer(e.to_string()))?;
    Ok(res
        .state()
        .get_best_param()
        .cloned()
        .unwrap_or_else(|| start.to_vec()))
}

fn optimize<C: Chart>(
    chart: &C,
    g: &WitnessFunctional,
    measurements: &MeasurementAssemblage,
    cfg: &OptimizerConfig,
) -> Result<MeasurementOptimum> {
    let obj = Objective {
        chart,
        g,
        measurements,
    };
    let candidates = chart.candidates(cfg);
    let margins = map_indexed(candidates.len(), cfg.parallelism, |i| {
        obj.margin(&candidates[i])
    });
    // Stable sort keeps enumeration order among equal margins.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| margins[b].total_cmp(&margins[a]));
    let starts: Vec<usize> = order.into_iter().take(REFINE_STARTS).collect();

    let refined = map_indexed(starts.len(), cfg.parallelism, |k| {
        let p = refine(&obj, &candidates[starts[k]], cfg)?;
        let m = obj.margin(&p);
        Ok((p, m))
    });

    let mut best_params = candidates[starts[0]].clone();
    let mut best = margins[starts[0]];
    for r in refined {
        let (p, m) = r?;
        if m > best {
            best = m;
            best_params = p;
        }
    }
    if !best.is_finite() {
        return Err(Error::Optimizer(
            "no candidate state could be evaluated".into(),
        ));
    }
    Ok(MeasurementOptimum {
        value: best.max(0.0),
        margin: best,
        rho_b: chart.state(&best_params),
    })
}

/// Lower bound on `sup_ρ S_g(√ρ M √ρ)` over full-rank `ρ` with eigenvalues
/// at least `cfg.rank_floor`, together with the best `ρ` found.
pub fn measurement_incompatibility(
    g: &WitnessFunctional,
    measurements: &MeasurementAssemblage,
    cfg: &OptimizerConfig,
) -> Result<MeasurementOptimum> {
    cfg.validate()?;
    if g.dim() != measurements.dim() {
        return Err(Error::Shape(format!(
            "functional dim {} but measurement dim {}",
            g.dim(),
            measurements.dim()
        )));
    }
    if !g.roof_exact() {
        return Err(Error::InexactRoof(g.name().to_string()));
    }
    match measurements.dim() {
        2 => optimize(
            &BlochChart {
                r_max: 1.0 - 2.0 * cfg.rank_floor,
            },
            g,
            measurements,
            cfg,
        ),
        d => optimize(
            &ExpChart {
                dim: d,
                floor: cfg.rank_floor,
            },
            g,
            measurements,
            cfg,
        ),
    }
}
