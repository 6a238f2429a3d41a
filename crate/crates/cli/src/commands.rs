//! Implementations of `witness`, `scan` and `threshold`.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _};
use incompat::functionals::{Context, ReferenceBasis, WitnessFunctional};
use incompat::linalg::{pauli, C64};
use incompat::par::Parallelism;
use incompat::quantum::{random, DensityMatrix, InstrumentAssemblage};
use incompat::scenarios::{
    find_threshold, scan_instrument, scan_steering, steering_margin, verify_analytic_mi, Axis,
    Parameter, Range, ScanGrid, ScanTable, DEFAULT_BRACKET, DEFAULT_RESOLUTION,
};
use incompat::witness::{
    embed_measurement, measurement_incompatibility, seo, violation, OptimizerConfig, WitnessReport,
    VIOLATION_TOL,
};
use incompat::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{ContextArgs, Curve, FunctionalName, Panel};
use incompat_cli::format::{self, format_number, Assemblage};

/// Random pure inputs tried for instrument files, on top of the basis
/// states and their equal superpositions.
const INSTRUMENT_RANDOM_INPUTS: usize = 16;
/// Sample points for the analytic skew-information check before `threshold mi`.
const MI_CHECK_POINTS: usize = 21;
const MI_CHECK_TOL: f64 = 1e-8;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Context from the flags, then the file, then the qubit defaults.
pub fn resolve_context(
    name: FunctionalName,
    flags: &ContextArgs,
    from_file: Option<&Context>,
    dim: usize,
) -> anyhow::Result<Context> {
    if let Some(p) = &flags.observable {
        let h = format::parse_observable(&read(p)?).with_context(|| format!("{}", p.display()))?;
        return Ok(Context::Observable(h));
    }
    if let Some(p) = &flags.basis {
        let b = format::parse_basis(&read(p)?).with_context(|| format!("{}", p.display()))?;
        return Ok(Context::Basis(b));
    }
    if let Some(c) = from_file {
        return Ok(c.clone());
    }
    match name {
        FunctionalName::Wysi if dim == 2 => Ok(Context::Observable(pauli::z())),
        FunctionalName::Wysi => bail!("wysi on dimension {dim} needs --observable"),
        FunctionalName::L2 => Ok(Context::Basis(ReferenceBasis::computational(dim))),
    }
}

pub fn functional(
    name: FunctionalName,
    flags: &ContextArgs,
    from_file: Option<&Context>,
    dim: usize,
) -> anyhow::Result<WitnessFunctional> {
    let ctx = resolve_context(name, flags, from_file, dim)?;
    if ctx.dim() != dim {
        bail!(
            "context has dimension {} but the assemblage has {dim}",
            ctx.dim()
        );
    }
    Ok(WitnessFunctional::from_name(name.as_str(), ctx)?)
}

fn matrix_value(rho: &DensityMatrix) -> Value {
    serde_json::to_value(format::from_matrix(rho.as_matrix())).expect("finite")
}

fn report_value(report: &WitnessReport, kind: &str) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable");
    v["kind"] = json!(kind);
    v
}

/// Pure inputs for instrument files: basis states, pairwise superpositions
/// and seeded Haar-random states.
fn instrument_inputs(dim: usize, seed: u64) -> Vec<DensityMatrix> {
    let mut inputs: Vec<DensityMatrix> = (0..dim).map(|k| DensityMatrix::basis(dim, k)).collect();
    for i in 0..dim {
        for j in i + 1..dim {
            let mut psi = vec![C64::new(0.0, 0.0); dim];
            psi[i] = C64::new(1.0, 0.0);
            psi[j] = C64::new(1.0, 0.0);
            inputs.push(DensityMatrix::pure(&psi).expect("nonzero"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..INSTRUMENT_RANDOM_INPUTS {
        inputs.push(DensityMatrix::pure(&random::pure_state(dim, &mut rng)).expect("normalized"));
    }
    inputs
}

/// Best report over the instrument's induced assemblages. Where the
/// steering-equivalent observables exist they are searched over `ρ_B` and
/// the report is taken on the re-embedded assemblage.
fn instrument_report(
    name: FunctionalName,
    flags: &ContextArgs,
    file_ctx: Option<&Context>,
    inst: &InstrumentAssemblage,
    cfg: &OptimizerConfig,
) -> anyhow::Result<Value> {
    let g = functional(name, flags, file_ctx, inst.dim_out())?;
    let mut best: Option<(f64, WitnessReport, usize, Option<DensityMatrix>)> = None;
    let inputs = instrument_inputs(inst.dim_in(), cfg.seed);
    for (i, rho_c) in inputs.iter().enumerate() {
        let sigma = inst.induced_assemblage(rho_c)?;
        let (value, report, rho_b) = match seo(&sigma, cfg.rank_floor) {
            Ok(b) => {
                let opt = measurement_incompatibility(&g, &b, cfg)?;
                let report = violation(&g, &embed_measurement(&b, &opt.rho_b)?)?;
                (opt.value, report, Some(opt.rho_b))
            }
            Err(Error::SeoUndefined(_)) => {
                let report = violation(&g, &sigma)?;
                (report.violation, report, None)
            }
            Err(e) => return Err(e.into()),
        };
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, report, i, rho_b));
        }
    }
    let (_, report, i, rho_b) = best.ok_or_else(|| anyhow!("no input states"))?;
    let mut v = report_value(&report, "instrument");
    v["rho_c"] = matrix_value(&inputs[i]);
    if let Some(rho) = rho_b {
        v["rho_b"] = matrix_value(&rho);
    }
    Ok(v)
}

pub fn witness(
    input: &Path,
    name: FunctionalName,
    flags: &ContextArgs,
    seed: u64,
) -> anyhow::Result<ExitCode> {
    let source = read(input)?;
    let parsed = format::parse(&source).with_context(|| format!("{}", input.display()))?;
    let ctx = parsed.context.as_ref();
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let value = match &parsed.assemblage {
        Assemblage::State(sigma) => {
            let g = functional(name, flags, ctx, sigma.dim())?;
            report_value(&violation(&g, sigma)?, "state")
        }
        Assemblage::Measurement(m) => {
            let g = functional(name, flags, ctx, m.dim())?;
            let opt = measurement_incompatibility(&g, m, &cfg)?;
            let report = violation(&g, &embed_measurement(m, &opt.rho_b)?)?;
            let mut v = report_value(&report, "measurement");
            v["rho_b"] = matrix_value(&opt.rho_b);
            v
        }
        Assemblage::Instrument(inst) => instrument_report(name, flags, ctx, inst, &cfg)?,
    };
    println!("{}", serde_json::to_string_pretty(&value)?);
    let violated = value["violation"].as_f64().unwrap_or(0.0) > VIOLATION_TOL;
    Ok(if violated {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn axis(parameter: Parameter, flag: Option<&str>) -> anyhow::Result<Axis> {
    match flag {
        Some(s) => {
            let range: Range = s
                .parse()
                .map_err(|e| anyhow!("--{} {s}: {e}", parameter.name()))?;
            Ok(Axis::new(parameter, range)?)
        }
        None => Ok(Axis::full(parameter, DEFAULT_RESOLUTION)?),
    }
}

/// CSV with 12-significant-digit values, one row per grid cell.
pub fn render_csv(table: &ScanTable) -> String {
    let mut out = table.header().join(",");
    out.push('\n');
    for (a, b, values) in &table.rows {
        let mut fields = vec![format_number(*a), format_number(*b)];
        fields.extend(values.iter().map(|v| format_number(*v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn summarize(table: &ScanTable) {
    for (j, name) in table.functionals.iter().enumerate() {
        let col = table.column(j);
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let crossings: Vec<String> = table
            .zero_crossings(j, VIOLATION_TOL)
            .into_iter()
            .map(|(_, n)| n.to_string())
            .collect();
        eprintln!(
            "{name}: min {} max {} crossings per {} row [{}]",
            format_number(min),
            format_number(max),
            table.grid.outer.parameter.name(),
            crossings.join(" ")
        );
    }
}

pub fn scan(
    panel: Panel,
    names: &[FunctionalName],
    flags: &ContextArgs,
    theta: Option<String>,
    w: Option<String>,
    gamma: Option<String>,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let names = if names.is_empty() {
        vec![FunctionalName::Wysi, FunctionalName::L2]
    } else {
        names.to_vec()
    };
    let functionals = names
        .iter()
        .map(|&n| functional(n, flags, None, 2))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let inner = axis(Parameter::W, w.as_deref())?;
    let table = match panel {
        Panel::Steering => {
            if gamma.is_some() {
                bail!("--gamma applies to the instrument panel");
            }
            let grid = ScanGrid::new(axis(Parameter::Theta, theta.as_deref())?, inner);
            scan_steering(&functionals, &grid, Parallelism::Parallel)?
        }
        Panel::Instrument => {
            if theta.is_some() {
                bail!("--theta applies to the steering panel");
            }
            let grid = ScanGrid::new(axis(Parameter::Gamma, gamma.as_deref())?, inner);
            scan_instrument(
                &functionals,
                &grid,
                &DensityMatrix::basis(2, 1),
                Parallelism::Parallel,
            )?
        }
    };
    let csv = render_csv(&table);
    match out {
        Some(p) => {
            std::fs::write(p, csv).with_context(|| format!("cannot write {}", p.display()))?
        }
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    summarize(&table);
    Ok(ExitCode::SUCCESS)
}

pub fn threshold(
    curve: Curve,
    tol: f64,
    name: FunctionalName,
    theta: Option<String>,
) -> anyhow::Result<ExitCode> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be positive, got {tol}");
    }
    let no_flags = ContextArgs {
        observable: None,
        basis: None,
    };
    let (g, theta) = match curve {
        Curve::Mn => (
            functional(FunctionalName::L2, &no_flags, None, 2)?,
            FRAC_PI_4,
        ),
        Curve::Mi => {
            verify_analytic_mi(MI_CHECK_POINTS, MI_CHECK_TOL)?;
            (
                functional(FunctionalName::Wysi, &no_flags, None, 2)?,
                FRAC_PI_4,
            )
        }
        Curve::Scan => {
            let theta = match theta {
                Some(s) => {
                    // a single point parses as the range s:s:2
                    let r: Range = format!("{s}:{s}:2")
                        .parse()
                        .map_err(|e| anyhow!("--theta {s}: {e}"))?;
                    Axis::new(Parameter::Theta, r)?.range.min
                }
                None => FRAC_PI_4,
            };
            (functional(name, &no_flags, None, 2)?, theta)
        }
    };
    let root = find_threshold(|w| steering_margin(&g, theta, w), DEFAULT_BRACKET, tol)?;
    println!("{}", format_number(root));
    Ok(ExitCode::SUCCESS)
}
