use incompat::functionals::{
    l2_coherence, summed_variance, variance, wysi, wysi_lower_bound, ReferenceBasis,
    WitnessFunctional,
};
use incompat::linalg::{partial_trace, psd_sqrt, Subsystem};
use incompat::par::Parallelism;
use incompat::quantum::{
    conditional_assemblage, fine_grain, maximally_entangled, random, DensityMatrix,
};
use incompat::witness::{
    apply_wiring, embed_measurement, measurement_incompatibility, seo, violation, OptimizerConfig,
    Wiring,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_states_are_valid(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let rho = random::density(d, &mut r);
        prop_assert!((rho.as_hermitian().trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.as_hermitian().eig().unwrap().min() > -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn square_root_squares_back(seed in any::<u64>(), d in 1usize..5) {
        let rho = random::density(d, &mut rng(seed));
        let s = psd_sqrt(rho.as_hermitian()).unwrap();
        let back = s.as_matrix() * s.as_matrix();
        prop_assert!(back.max_abs_diff(rho.as_matrix()) < 1e-10);
    }

    #[test]
    fn partial_traces_preserve_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let rho = random::density(da * db, &mut rng(seed));
        for keep in [Subsystem::A, Subsystem::B] {
            let r = partial_trace(rho.as_hermitian(), da, db, keep).unwrap();
            prop_assert!((r.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn functional_chain(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let rho = random::density(d, &mut r);
        let h = random::hermitian(d, &mut r);
        let basis = ReferenceBasis::from_unitary(&random::unitary(d, &mut r)).unwrap();
        let il = wysi_lower_bound(&rho, &h).unwrap();
        let i = wysi(&rho, &h).unwrap();
        prop_assert!(il <= i + 1e-10);
        prop_assert!(i <= variance(&rho, &h).unwrap() + 1e-10);
        let n = l2_coherence(&rho, &basis).unwrap();
        prop_assert!(n <= summed_variance(&rho, &basis).unwrap() + 1e-10);
        let split: f64 = basis.projectors().iter().map(|p| 2.0 * wysi_lower_bound(&rho, p).unwrap()).sum();
        prop_assert!((n - split).abs() < 1e-10);
    }

    #[test]
    fn pure_states_saturate_the_roof(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let psi = DensityMatrix::pure(&random::pure_state(d, &mut r)).unwrap();
        let h = random::hermitian(d, &mut r);
        prop_assert!((wysi(&psi, &h).unwrap() - variance(&psi, &h).unwrap()).abs() < 1e-9);
        let b = ReferenceBasis::computational(d);
        prop_assert!((l2_coherence(&psi, &b).unwrap() - summed_variance(&psi, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn ho_assemblages_never_violate(
        seed in any::<u64>(),
        d in 2usize..4,
        settings in 1usize..5,
        outcomes in 1usize..5,
        hidden in 1usize..6,
    ) {
        let mut r = rng(seed);
        let sigma = random::ho_state_assemblage(d, settings, outcomes, hidden, &mut r);
        for g in [
            WitnessFunctional::wysi(random::hermitian(d, &mut r)),
            WitnessFunctional::l2(ReferenceBasis::computational(d)),
        ] {
            prop_assert!(violation(&g, &sigma).unwrap().violation <= 1e-9);
        }
    }

    #[test]
    fn wirings_never_increase_violation(seed in any::<u64>(), out_settings in 1usize..4, out_outcomes in 1usize..4) {
        let mut r = rng(seed);
        let m = random::measurement_assemblage(2, 2, 3, &mut r);
        let sigma = conditional_assemblage(&maximally_entangled(2), &m, 2, 2).unwrap();
        let w = Wiring::random(&sigma.outcomes(), out_settings, out_outcomes, &mut r);
        let wired = apply_wiring(&sigma, &w).unwrap();
        let g = WitnessFunctional::wysi(random::hermitian(2, &mut r));
        prop_assert!(violation(&g, &wired).unwrap().violation <= violation(&g, &sigma).unwrap().violation + 1e-9);
    }

    #[test]
    fn seo_inverts_embedding(seed in any::<u64>(), d in 2usize..4) {
        let mut r = rng(seed);
        let m = random::measurement_assemblage(d, 2, 3, &mut r);
        let rho = random::density(d, &mut r);
        let back = seo(&embed_measurement(&m, &rho).unwrap(), 1e-12).unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-8);
    }

    #[test]
    fn fine_graining_never_lowers_violation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random::measurement_assemblage(2, 2, 2, &mut r);
        let fine = fine_grain(&m).unwrap();
        prop_assert!(fine.coarse_grain().unwrap().max_abs_diff(&m) < 1e-12);
        let phi = maximally_entangled(2);
        let coarse = conditional_assemblage(&phi, &m, 2, 2).unwrap();
        let refined = conditional_assemblage(&phi, &fine.assemblage, 2, 2).unwrap();
        let g = WitnessFunctional::wysi(random::hermitian(2, &mut r));
        prop_assert!(violation(&g, &coarse).unwrap().violation <= violation(&g, &refined).unwrap().violation + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn optimizer_modes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random::measurement_assemblage(2, 2, 2, &mut r);
        let g = WitnessFunctional::l2(ReferenceBasis::computational(2));
        let base = OptimizerConfig { grid_resolution: 5, refine_iterations: 50, ..Default::default() };
        let par = measurement_incompatibility(&g, &m, &base).unwrap();
        let seq = measurement_incompatibility(
            &g,
            &m,
            &OptimizerConfig { parallelism: Parallelism::Sequential, ..base },
        )
        .unwrap();
        prop_assert_eq!(par.value.to_bits(), seq.value.to_bits());
        // the search never beats the pure-state ceiling at 1/d
        prop_assert!(par.value <= 0.5 + 1e-9);
    }
}
