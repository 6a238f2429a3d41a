//! Built-in invariant suites. Each suite prints one PASS or FAIL line.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use incompat::functionals::{
    l2_coherence, roof_sample_lower_bound, summed_variance, variance, wysi, wysi_lower_bound,
    ReferenceBasis, Registry, WitnessFunctional,
};
use incompat::linalg::pauli;
use incompat::quantum::{conditional_assemblage, maximally_entangled, random, DensityMatrix};
use incompat::scenarios::{
    analytic_mn_signed, find_threshold, instrument_cell, mn_root, steering_margin,
    verify_analytic_mi, DEFAULT_BRACKET,
};
use incompat::witness::{
    apply_wiring, embed_measurement, pure_state_bound, seo, violation, Wiring,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use incompat_cli::format::{self, Assemblage};

const HO_FIXTURE: &str = include_str!("../fixtures/ho.json");
const PAULI_FIXTURE: &str = include_str!("../fixtures/noisy_pauli_w0.json");
const BAD_FIXTURE: &str = include_str!("../fixtures/nonhermitian.json");

type Outcome = Result<(), String>;
type Suite<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Fixtures {
    ho: Result<String, String>,
    pauli: Result<String, String>,
    bad: Result<String, String>,
}

impl Fixtures {
    fn embedded() -> Self {
        Self {
            ho: Ok(HO_FIXTURE.to_string()),
            pauli: Ok(PAULI_FIXTURE.to_string()),
            bad: Ok(BAD_FIXTURE.to_string()),
        }
    }

    fn from_dir(dir: &Path) -> Self {
        let load = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))
        };
        Self {
            ho: load("ho.json"),
            pauli: load("noisy_pauli_w0.json"),
            bad: load("nonhermitian.json"),
        }
    }
}

fn state_fixture(source: &Result<String, String>) -> Result<format::Parsed, String> {
    let parsed = format::parse(source.as_ref().map_err(Clone::clone)?).map_err(err)?;
    match parsed.assemblage {
        Assemblage::State(_) => Ok(parsed),
        _ => Err("expected a state assemblage".into()),
    }
}

fn suite_fixtures(f: &Fixtures) -> Outcome {
    let ho = state_fixture(&f.ho)?;
    let Assemblage::State(sigma) = &ho.assemblage else {
        unreachable!()
    };
    for g in Registry::qubit_defaults().iter() {
        let v = violation(g, sigma).map_err(err)?.violation;
        check(v <= 1e-9, || format!("ho.json: {} violation {v}", g.name()))?;
    }
    let pauli_fixture = state_fixture(&f.pauli)?;
    let Assemblage::State(sigma) = &pauli_fixture.assemblage else {
        unreachable!()
    };
    let basis = match pauli_fixture.context {
        Some(incompat::functionals::Context::Basis(b)) => b,
        _ => ReferenceBasis::computational(2),
    };
    let v = violation(&WitnessFunctional::l2(basis), sigma)
        .map_err(err)?
        .violation;
    check((v - 0.5).abs() <= 1e-9, || {
        format!("noisy_pauli_w0.json: l2 violation {v}")
    })?;
    let bad = f.bad.as_ref().map_err(Clone::clone)?;
    match format::parse(bad) {
        Ok(_) => Err("nonhermitian.json parsed without error".into()),
        Err(e) if e.to_string().contains("\"1:0\"") => Ok(()),
        Err(e) => Err(format!(
            "nonhermitian.json error does not name the element: {e}"
        )),
    }
}

fn suite_thresholds() -> Outcome {
    let l2 = WitnessFunctional::l2(ReferenceBasis::computational(2));
    let t = find_threshold(
        |w| steering_margin(&l2, FRAC_PI_4, w),
        DEFAULT_BRACKET,
        1e-12,
    )
    .map_err(err)?;
    check((t - mn_root()).abs() <= 1e-9, || {
        format!("mn threshold {t}")
    })?;
    for w in [0.0, 0.1, 0.25, 0.4] {
        let e = steering_margin(&l2, FRAC_PI_4, w).map_err(err)?;
        let a = analytic_mn_signed(w);
        check((e - a).abs() <= 1e-9, || {
            format!("mn curve at w={w}: {e} vs {a}")
        })?;
    }
    verify_analytic_mi(21, 1e-8).map_err(err)?;
    let wysi_g = WitnessFunctional::wysi(pauli::z());
    let t = find_threshold(
        |w| steering_margin(&wysi_g, FRAC_PI_4, w),
        DEFAULT_BRACKET,
        1e-10,
    )
    .map_err(err)?;
    check((t - 0.213).abs() <= 0.005, || format!("mi threshold {t}"))
}

fn suite_maximal() -> Outcome {
    let mixed = DensityMatrix::maximally_mixed(2);
    for (g, expected) in [
        (WitnessFunctional::l2(ReferenceBasis::computational(2)), 0.5),
        (WitnessFunctional::wysi(pauli::z()), 1.0),
    ] {
        let v = steering_margin(&g, FRAC_PI_4, 0.0).map_err(err)?;
        let ceiling = pure_state_bound(&g, &mixed).map_err(err)?;
        check(
            (v - expected).abs() <= 1e-9 && (v - ceiling).abs() <= 1e-9,
            || {
                format!(
                    "{}: value {v}, ceiling {ceiling}, expected {expected}",
                    g.name()
                )
            },
        )?;
    }
    Ok(())
}

fn panel_functionals() -> Vec<WitnessFunctional> {
    vec![
        WitnessFunctional::wysi(pauli::z()),
        WitnessFunctional::l2(ReferenceBasis::computational(2)),
    ]
}

fn suite_instrument() -> Outcome {
    let gs = panel_functionals();
    let one = DensityMatrix::basis(2, 1);
    for gamma in [0.0, 1.0] {
        for w in [0.0, 0.3, 1.0] {
            let v = instrument_cell(&gs, gamma, w, &one).map_err(err)?;
            check(v.iter().all(|&x| x == 0.0), || {
                format!("γ={gamma} w={w}: {v:?}")
            })?;
        }
    }
    let v = instrument_cell(&gs, 0.5, 0.0, &one).map_err(err)?;
    for (g, value) in gs.iter().zip(&v) {
        let m = steering_margin(g, FRAC_PI_4, 0.0).map_err(err)?;
        check((value - m).abs() <= 1e-9, || {
            format!("{} at γ=0.5: {value} vs {m}", g.name())
        })?;
    }
    Ok(())
}

fn suite_functionals(n: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..n {
        let d = 2 + i % 3;
        let rho = random::density(d, &mut rng);
        let h = random::hermitian(d, &mut rng);
        let basis = ReferenceBasis::computational(d);
        let il = wysi_lower_bound(&rho, &h).map_err(err)?;
        let i_val = wysi(&rho, &h).map_err(err)?;
        let var = variance(&rho, &h).map_err(err)?;
        check(il <= i_val + 1e-10 && i_val <= var + 1e-10, || {
            format!("chain I^L ≤ I ≤ Var broken: {il} {i_val} {var}")
        })?;
        let n_val = l2_coherence(&rho, &basis).map_err(err)?;
        let sv = summed_variance(&rho, &basis).map_err(err)?;
        check(n_val <= sv + 1e-10, || {
            format!("N ≤ summed variance broken: {n_val} {sv}")
        })?;
        let mut split = 0.0;
        for p in basis.projectors() {
            split += 2.0 * wysi_lower_bound(&rho, p).map_err(err)?;
        }
        check((n_val - split).abs() <= 1e-10, || {
            format!("N = Σ2I^L broken: {n_val} {split}")
        })?;
    }
    let g = WitnessFunctional::wysi(pauli::z());
    for s in 0..5 {
        let rho = random::density(2, &mut rng);
        let sampled = roof_sample_lower_bound(&g, &rho, 50, s).map_err(err)?;
        let roof = g.evaluate_roof(&rho).map_err(err)?;
        check(sampled <= roof + 1e-10, || {
            format!("sampled roof {sampled} above {roof}")
        })?;
    }
    Ok(())
}

fn suite_ho_soundness(n: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..n {
        let d = 2 + i % 2;
        let settings = rng.random_range(1..=4);
        let outcomes = rng.random_range(1..=4);
        let hidden = rng.random_range(1..=6);
        let sigma = random::ho_state_assemblage(d, settings, outcomes, hidden, &mut rng);
        for g in [
            WitnessFunctional::wysi(random::hermitian(d, &mut rng)),
            WitnessFunctional::l2(ReferenceBasis::computational(d)),
        ] {
            let v = violation(&g, &sigma).map_err(err)?.violation;
            check(v <= 1e-9, || {
                format!("HO assemblage {i}: {} violation {v}", g.name())
            })?;
        }
    }
    Ok(())
}

fn suite_ergotropy(n: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = WitnessFunctional::ergotropy(pauli::z());
    let phi = maximally_entangled(2);
    for i in 0..n {
        let m = random::measurement_assemblage(2, 2, 2, &mut rng);
        let sigma = if i % 2 == 0 {
            conditional_assemblage(&phi, &m, 2, 2).map_err(err)?
        } else {
            random::ho_state_assemblage(2, 2, 2, 3, &mut rng)
        };
        let v = violation(&g, &sigma).map_err(err)?.violation;
        check(v <= 1e-9, || {
            format!("ergotropy violation {v} on assemblage {i}")
        })?;
    }
    Ok(())
}

fn suite_seo(n: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let phi = maximally_entangled(2);
    for _ in 0..n {
        let m = random::measurement_assemblage(2, 2, 3, &mut rng);
        let sigma = conditional_assemblage(&phi, &m, 2, 2).map_err(err)?;
        let b = seo(&sigma, 1e-9).map_err(err)?;
        let d = b.max_abs_diff(&m.transpose());
        check(d <= 1e-9, || format!("seo differs from transpose by {d}"))?;
        let rho = random::density(2, &mut rng);
        let back = seo(&embed_measurement(&m, &rho).map_err(err)?, 1e-12).map_err(err)?;
        let d = back.max_abs_diff(&m);
        check(d <= 1e-8, || format!("seo round trip error {d}"))?;
    }
    Ok(())
}

fn suite_wiring(n: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = maximally_entangled(2);
    let gs = panel_functionals();
    for _ in 0..n {
        let m = random::measurement_assemblage(2, 2, 2, &mut rng);
        let sigma = conditional_assemblage(&phi, &m, 2, 2).map_err(err)?;
        let wiring = Wiring::random(&sigma.outcomes(), 2, 2, &mut rng);
        let wired = apply_wiring(&sigma, &wiring).map_err(err)?;
        for g in &gs {
            let before = violation(g, &sigma).map_err(err)?.violation;
            let after = violation(g, &wired).map_err(err)?.violation;
            check(after <= before + 1e-9, || {
                format!("{}: wiring raised {before} to {after}", g.name())
            })?;
        }
    }
    Ok(())
}

pub fn run(full: bool, fixtures: Option<&Path>) -> anyhow::Result<ExitCode> {
    let fixtures = fixtures.map_or_else(Fixtures::embedded, Fixtures::from_dir);
    let scale = |quick: usize, full_n: usize| if full { full_n } else { quick };
    let suites: Vec<Suite> = vec![
        ("fixtures", Box::new(|| suite_fixtures(&fixtures))),
        ("thresholds", Box::new(suite_thresholds)),
        ("maximal-violation", Box::new(suite_maximal)),
        ("instrument", Box::new(suite_instrument)),
        (
            "functionals",
            Box::new(move || suite_functionals(scale(100, 1000))),
        ),
        (
            "ho-soundness",
            Box::new(move || suite_ho_soundness(scale(50, 500))),
        ),
        (
            "ergotropy",
            Box::new(move || suite_ergotropy(scale(40, 200))),
        ),
        ("seo", Box::new(move || suite_seo(scale(20, 100)))),
        ("wiring", Box::new(move || suite_wiring(scale(20, 200)))),
    ];
    let mut failed = 0;
    for (name, suite) in &suites {
        let start = Instant::now();
        match suite() {
            Ok(()) => println!("PASS {name} ({:.2}s)", start.elapsed().as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!(
        "{} of {} suites passed",
        suites.len() - failed,
        suites.len()
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
