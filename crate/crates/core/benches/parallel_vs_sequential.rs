use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use incompat::functionals::{ReferenceBasis, WitnessFunctional};
use incompat::linalg::pauli;
use incompat::par::Parallelism;
use incompat::quantum::{random, DensityMatrix};
use incompat::scenarios::{scan_instrument, scan_steering, Axis, Parameter, ScanGrid};
use incompat::witness::{measurement_incompatibility, OptimizerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Parallelism); 2] = [
    ("parallel", Parallelism::Parallel),
    ("sequential", Parallelism::Sequential),
];

fn functionals() -> Vec<WitnessFunctional> {
    vec![
        WitnessFunctional::wysi(pauli::z()),
        WitnessFunctional::l2(ReferenceBasis::computational(2)),
    ]
}

fn scans(c: &mut Criterion) {
    let gs = functionals();
    let steering = ScanGrid::new(
        Axis::full(Parameter::Theta, 41).unwrap(),
        Axis::full(Parameter::W, 41).unwrap(),
    );
    let instrument = ScanGrid::new(
        Axis::full(Parameter::Gamma, 41).unwrap(),
        Axis::full(Parameter::W, 41).unwrap(),
    );
    let rho_c = DensityMatrix::basis(2, 1);
    let mut group = c.benchmark_group("scan_41x41");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new("steering", name), &mode, |b, &mode| {
            b.iter(|| scan_steering(&gs, &steering, mode).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("instrument", name), &mode, |b, &mode| {
            b.iter(|| scan_instrument(&gs, &instrument, &rho_c, mode).unwrap())
        });
    }
    group.finish();
}

fn optimizer(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let qubit = random::measurement_assemblage(2, 3, 2, &mut rng);
    let qutrit = random::measurement_assemblage(3, 2, 3, &mut rng);
    let g2 = WitnessFunctional::l2(ReferenceBasis::computational(2));
    let g3 = WitnessFunctional::l2(ReferenceBasis::computational(3));
    let mut group = c.benchmark_group("measurement_incompatibility");
    group.sample_size(10);
    for (name, mode) in MODES {
        let cfg = OptimizerConfig {
            parallelism: mode,
            ..OptimizerConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("qubit", name), &cfg, |b, cfg| {
            b.iter(|| measurement_incompatibility(&g2, &qubit, cfg).unwrap())
        });
        let cfg = OptimizerConfig {
            grid_resolution: 5,
            ..cfg
        };
        group.bench_with_input(BenchmarkId::new("qutrit", name), &cfg, |b, cfg| {
            b.iter(|| measurement_incompatibility(&g3, &qutrit, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scans, optimizer);
criterion_main!(benches);
