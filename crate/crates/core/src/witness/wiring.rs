//! Classical post-processing of assemblages.
//!
//! A wiring picks an input setting `x` with `p(x|x')` and relabels its
//! outcome with `p(a'|a,x,x')`:
//! `O'_{a'|x'} = Σ_x p(x|x') Σ_a p(a'|a,x,x') O_{a|x}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::quantum::random::probability_vector;
use crate::quantum::{MeasurementAssemblage, StateAssemblage};

#[derive(Debug, Clone, PartialEq)]
pub struct Wiring {
    /// `setting_choice[x'][x] = p(x|x')`.
    setting_choice: Vec<Vec<f64>>,
    /// `relabel[x'][x][a][a'] = p(a'|a,x,x')`.
    relabel: Vec<Vec<Vec<Vec<f64>>>>,
    input_outcomes: Vec<usize>,
    output_outcomes: Vec<usize>,
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::NotStochastic(format!("{what} has a negative entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotStochastic(format!("{what} sums to {total}")));
    }
    Ok(())
}

impl Wiring {
    pub fn new(setting_choice: Vec<Vec<f64>>, relabel: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        let out_settings = setting_choice.len();
        if out_settings == 0 || relabel.len() != out_settings {
            return Err(Error::NotStochastic(
                "wiring tables disagree on output settings".into(),
            ));
        }
        let in_settings = setting_choice[0].len();
        let input_outcomes: Vec<usize> = relabel[0].iter().map(Vec::len).collect();
        let mut output_outcomes = Vec::with_capacity(out_settings);
        for (xp, (choice, tables)) in setting_choice.iter().zip(&relabel).enumerate() {
            if choice.len() != in_settings || tables.len() != in_settings {
                return Err(Error::NotStochastic(format!("ragged tables at x'={xp}")));
            }
            check_distribution(choice, &format!("p(·|x'={xp})"))?;
            let n_out = tables[0].first().map_or(0, Vec::len);
            for (x, per_a) in tables.iter().enumerate() {
                if per_a.len() != input_outcomes[x] {
                    return Err(Error::NotStochastic(format!(
                        "setting {x} has inconsistent outcome counts"
                    )));
                }
                for (a, dist) in per_a.iter().enumerate() {
                    if dist.len() != n_out {
                        return Err(Error::NotStochastic(format!(
                            "ragged relabeling at x'={xp}"
                        )));
                    }
                    check_distribution(dist, &format!("p(·|a={a},x={x},x'={xp})"))?;
                }
            }
            output_outcomes.push(n_out);
        }
        Ok(Self {
            setting_choice,
            relabel,
            input_outcomes,
            output_outcomes,
        })
    }

    pub fn identity(outcomes: &[usize]) -> Self {
        let m = outcomes.len();
        let setting_choice = (0..m)
            .map(|xp| (0..m).map(|x| if x == xp { 1.0 } else { 0.0 }).collect())
            .collect();
        let relabel = (0..m)
            .map(|_| {
                outcomes
                    .iter()
                    .map(|&n| {
                        (0..n)
                            .map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(setting_choice, relabel).expect("identity is stochastic")
    }

    /// Keeps each setting but merges all outcomes into one.
    pub fn merge_all(outcomes: &[usize]) -> Self {
        let id = Self::identity(outcomes);
        let relabel = (0..outcomes.len())
            .map(|_| outcomes.iter().map(|&n| vec![vec![1.0]; n]).collect())
            .collect();
        Self::new(id.setting_choice, relabel).expect("merge is stochastic")
    }

    /// Uniformly random stochastic tables.
    pub fn random<R: Rng + ?Sized>(
        input_outcomes: &[usize],
        output_settings: usize,
        output_outcomes: usize,
        rng: &mut R,
    ) -> Self {
        let m = input_outcomes.len();
        let setting_choice = (0..output_settings)
            .map(|_| probability_vector(m, rng))
            .collect();
        let relabel = (0..output_settings)
            .map(|_| {
                input_outcomes
                    .iter()
                    .map(|&n| {
                        (0..n)
                            .map(|_| probability_vector(output_outcomes, rng))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(setting_choice, relabel).expect("random tables are stochastic")
    }

    pub fn input_outcomes(&self) -> &[usize] {
        &self.input_outcomes
    }

    pub fn output_outcomes(&self) -> &[usize] {
        &self.output_outcomes
    }

    fn combine(&self, elements: &[Vec<&HermitianMatrix>]) -> Result<Vec<Vec<HermitianMatrix>>> {
        let outcomes: Vec<usize> = elements.iter().map(Vec::len).collect();
        if outcomes != self.input_outcomes {
            return Err(Error::Shape(format!(
                "wiring expects outcomes {:?} but assemblage has {outcomes:?}",
                self.input_outcomes
            )));
        }
        let dim = elements[0][0].dim();
        self.output_outcomes
            .iter()
            .enumerate()
            .map(|(xp, &n_out)| {
                (0..n_out)
                    .map(|ap| {
                        let mut acc = HermitianMatrix::diag(&vec![0.0; dim]);
                        for (x, per_a) in elements.iter().enumerate() {
                            let px = self.setting_choice[xp][x];
                            if px == 0.0 {
                                continue;
                            }
                            for (a, op) in per_a.iter().enumerate() {
                                let w = px * self.relabel[xp][x][a][ap];
                                if w != 0.0 {
                                    acc = acc.add(&op.scale(w))?;
                                }
                            }
                        }
                        Ok(acc)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Assemblage kinds a wiring can act on.
pub trait Wireable: Sized {
    fn wire(&self, wiring: &Wiring) -> Result<Self>;
}

impl Wireable for StateAssemblage {
    fn wire(&self, wiring: &Wiring) -> Result<Self> {
        let refs: Vec<Vec<&HermitianMatrix>> = self
            .elements()
            .iter()
            .map(|s| s.iter().map(|e| e.as_hermitian()).collect())
            .collect();
        StateAssemblage::from_operators(wiring.combine(&refs)?)
    }
}

impl Wireable for MeasurementAssemblage {
    fn wire(&self, wiring: &Wiring) -> Result<Self> {
        let refs: Vec<Vec<&HermitianMatrix>> = self
            .elements()
            .iter()
            .map(|s| s.iter().map(|e| e.as_hermitian()).collect())
            .collect();
        MeasurementAssemblage::from_operators(wiring.combine(&refs)?)
    }
}

pub fn apply_wiring<T: Wireable>(assemblage: &T, wiring: &Wiring) -> Result<T> {
    assemblage.wire(wiring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Registry;
    use crate::quantum::{conditional_assemblage, noisy_pauli_assemblage, pure_state_family};
    use crate::witness::violation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigma() -> StateAssemblage {
        conditional_assemblage(
            &pure_state_family(0.6),
            &noisy_pauli_assemblage(0.1).unwrap(),
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn identity_is_a_no_op() {
        let s = sigma();
        let out = apply_wiring(&s, &Wiring::identity(&s.outcomes())).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                assert!(
                    out.element(x, a)
                        .as_hermitian()
                        .max_abs_diff(s.element(x, a).as_hermitian())
                        < 1e-15
                );
            }
        }
        let m = noisy_pauli_assemblage(0.2).unwrap();
        let back = apply_wiring(&m, &Wiring::identity(&m.outcomes())).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn merging_kills_every_witness() {
        let s = sigma();
        let out = apply_wiring(&s, &Wiring::merge_all(&s.outcomes())).unwrap();
        assert_eq!(out.outcomes(), vec![1, 1]);
        for g in Registry::qubit_defaults().iter() {
            assert!(violation(g, &out).unwrap().violation < 1e-12);
        }
    }

    #[test]
    fn random_wirings_do_not_increase_violation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = sigma();
        for _ in 0..20 {
            let w = Wiring::random(&s.outcomes(), 3, 2, &mut rng);
            let out = apply_wiring(&s, &w).unwrap();
            for g in Registry::qubit_defaults().iter() {
                let before = violation(g, &s).unwrap().violation;
                let after = violation(g, &out).unwrap().violation;
                assert!(after <= before + 1e-9, "{}: {after} > {before}", g.name());
            }
        }
    }

    #[test]
    fn non_stochastic_tables_rejected() {
        let bad = Wiring::new(
            vec![vec![0.5, 0.6]],
            vec![vec![vec![vec![1.0]], vec![vec![1.0]]]],
        );
        assert!(matches!(bad, Err(Error::NotStochastic(_))));
    }
}
