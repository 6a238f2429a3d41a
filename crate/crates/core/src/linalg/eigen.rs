//! Cyclic Jacobi eigensolver for small complex Hermitian matrices.

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::HermitianMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Spectral decomposition `A = U diag(values) U†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// Rebuilds `U f(diag) U†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * self.vectors.get(j, k).conj() * fv[k])
                .sum()
        })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<Eigen> {
    let n = a.dim();
    let mut m: Vec<C64> = a.as_matrix().entries().to_vec();
    let mut v: Vec<C64> = ComplexMatrix::identity(n).entries().to_vec();
    let idx = |i: usize, j: usize| i * n + j;

    let scale = a.as_matrix().frobenius_norm();
    if scale == 0.0 || n == 1 {
        return Ok(sorted(
            n,
            m.iter().step_by(n + 1).map(|z| z.re).collect(),
            v,
        ));
    }
    let threshold = scale * 1e-15;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[idx(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[idx(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[idx(p, p)].re;
                let aqq = m[idx(q, q)].re;
                // Phase e^{iφ} = apq/|apq| makes the 2x2 block real symmetric.
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = m[idx(k, p)];
                    let akq = m[idx(k, q)];
                    m[idx(k, p)] = akp * g_pp + akq * g_qp;
                    m[idx(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = m[idx(p, k)];
                    let aqk = m[idx(q, k)];
                    m[idx(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[idx(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[idx(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                m[idx(p, q)] = ZERO;
                m[idx(q, p)] = ZERO;
                m[idx(p, p)] = C64::new(m[idx(p, p)].re, 0.0);
                m[idx(q, q)] = C64::new(m[idx(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }
    Ok(sorted(n, (0..n).map(|i| m[idx(i, i)].re).collect(), v))
}

fn sorted(n: usize, values: Vec<f64>, v: Vec<C64>) -> Eigen {
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps degenerate eigenvectors in rotation order.
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE;
    use crate::quantum::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn herm(rows: usize, data: &[f64]) -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_real(rows, rows, data).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let e = hermitian_eig(&herm(2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        // permuted identity
        assert_eq!(e.vector(0), vec![ZERO, ONE]);
        assert_eq!(e.vector(1), vec![ONE, ZERO]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = hermitian_eig(&herm(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let minus = e.vector(0);
        let plus = e.vector(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // Fix the global phase of each eigenvector before comparing.
        let ph_m = minus[0] / minus[0].norm();
        let ph_p = plus[0] / plus[0].norm();
        assert!((minus[0] / ph_m - h).norm() < 1e-12);
        assert!((minus[1] / ph_m + h).norm() < 1e-12);
        assert!((plus[0] / ph_p - h).norm() < 1e-12);
        assert!((plus[1] / ph_p - h).norm() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 4, 7, 16] {
            let a = random::hermitian(d, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            let back = e.reconstruct_with(|l| l);
            assert!(back.max_abs_diff(a.as_matrix()) < 1e-9, "dim {d}");
            let gram = &e.vectors.dagger() * &e.vectors;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
