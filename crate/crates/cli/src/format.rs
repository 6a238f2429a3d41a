//! JSON assemblage files and CSV number formatting.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row lists:
//!
//! ```json
//! {"kind": "state", "dim": 2, "settings": 1, "outcomes": [1],
//!  "elements": {"0:0": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]},
//!  "context": {"observable": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}}
//! ```
//!
//! Instrument elements are lists of Kraus matrices of shape
//! `dim_out × dim` (`dim_out` defaults to `dim`).

use std::collections::BTreeMap;

use incompat::functionals::{Context, ReferenceBasis};
use incompat::linalg::{ComplexMatrix, HermitianMatrix, C64};
use incompat::quantum::{InstrumentAssemblage, MeasurementAssemblage, StateAssemblage};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("element \"{key}\"{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Element {
        key: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{0}")]
    Structure(String),
}

type Result<T> = std::result::Result<T, FormatError>;

pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    State,
    Measurement,
    Instrument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Matrix>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblageFile {
    pub kind: Kind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_out: Option<usize>,
    pub settings: usize,
    pub outcomes: Vec<usize>,
    pub elements: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<ContextFile>,
}

/// A parsed and validated assemblage.
#[derive(Debug, Clone)]
pub enum Assemblage {
    State(StateAssemblage),
    Measurement(MeasurementAssemblage),
    Instrument(InstrumentAssemblage),
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub assemblage: Assemblage,
    pub context: Option<Context>,
}

/// 1-based line of the first occurrence of `"key"` in the source.
fn line_of(source: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    source
        .lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

fn to_matrix(m: &Matrix) -> std::result::Result<ComplexMatrix, String> {
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|r| r.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn from_matrix(m: &ComplexMatrix) -> Matrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn hermitian(m: &Matrix) -> std::result::Result<HermitianMatrix, String> {
    HermitianMatrix::new(to_matrix(m)?).map_err(|e| e.to_string())
}

fn check_shape(m: &ComplexMatrix, rows: usize, cols: usize) -> std::result::Result<(), String> {
    if m.rows() != rows || m.cols() != cols {
        return Err(format!(
            "matrix is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        ));
    }
    Ok(())
}

pub fn parse_context(c: &ContextFile) -> std::result::Result<Context, String> {
    match (&c.observable, &c.basis) {
        (Some(h), None) => Ok(Context::Observable(hermitian(h)?)),
        (None, Some(b)) => {
            let projectors = b
                .iter()
                .map(hermitian)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            ReferenceBasis::new(projectors)
                .map(Context::Basis)
                .map_err(|e| e.to_string())
        }
        _ => Err("context needs exactly one of \"observable\" or \"basis\"".into()),
    }
}

/// Reads a standalone observable file (a single matrix).
pub fn parse_observable(source: &str) -> Result<HermitianMatrix> {
    let m: Matrix = serde_json::from_str(source)?;
    hermitian(&m).map_err(FormatError::Structure)
}

/// Reads a standalone basis file (a list of rank-one projectors).
pub fn parse_basis(source: &str) -> Result<ReferenceBasis> {
    let ms: Vec<Matrix> = serde_json::from_str(source)?;
    let projectors = ms
        .iter()
        .map(hermitian)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(FormatError::Structure)?;
    ReferenceBasis::new(projectors).map_err(|e| FormatError::Structure(e.to_string()))
}

pub fn parse(source: &str) -> Result<Parsed> {
    let file: AssemblageFile = serde_json::from_str(source)?;
    if file.outcomes.len() != file.settings {
        return Err(FormatError::Structure(format!(
            "\"outcomes\" lists {} settings but \"settings\" is {}",
            file.outcomes.len(),
            file.settings
        )));
    }
    let expected: usize = file.outcomes.iter().sum();
    if file.elements.len() != expected {
        return Err(FormatError::Structure(format!(
            "expected {expected} elements, found {}",
            file.elements.len()
        )));
    }
    let element_error = |key: &str, message: String| FormatError::Element {
        key: key.to_string(),
        line: line_of(source, key),
        message,
    };
    let value_of = |x: usize, a: usize| -> Result<(&Value, String)> {
        let key = format!("{x}:{a}");
        file.elements
            .get(&key)
            .map(|v| (v, key.clone()))
            .ok_or_else(|| FormatError::Structure(format!("missing element \"{key}\"")))
    };
    let dim = file.dim;
    let dim_out = file.dim_out.unwrap_or(dim);

    let assemblage = match file.kind {
        Kind::State | Kind::Measurement => {
            let mut ops = Vec::with_capacity(file.settings);
            for (x, &n) in file.outcomes.iter().enumerate() {
                let mut setting = Vec::with_capacity(n);
                for a in 0..n {
                    let (v, key) = value_of(x, a)?;
                    let m: Matrix = serde_json::from_value(v.clone())
                        .map_err(|e| element_error(&key, e.to_string()))?;
                    let h = to_matrix(&m)
                        .and_then(|c| check_shape(&c, dim, dim).map(|_| c))
                        .and_then(|c| HermitianMatrix::new(c).map_err(|e| e.to_string()))
                        .map_err(|msg| element_error(&key, msg))?;
                    setting.push(h);
                }
                ops.push(setting);
            }
            if file.kind == Kind::State {
                // validate each element individually so errors name the key
                for (x, setting) in ops.iter().enumerate() {
                    for (a, h) in setting.iter().enumerate() {
                        incompat::quantum::SubnormalizedState::new(h.clone())
                            .map_err(|e| element_error(&format!("{x}:{a}"), e.to_string()))?;
                    }
                }
                Assemblage::State(
                    StateAssemblage::from_operators(ops)
                        .map_err(|e| FormatError::Structure(e.to_string()))?,
                )
            } else {
                for (x, setting) in ops.iter().enumerate() {
                    for (a, h) in setting.iter().enumerate() {
                        incompat::quantum::Effect::new(h.clone())
                            .map_err(|e| element_error(&format!("{x}:{a}"), e.to_string()))?;
                    }
                }
                Assemblage::Measurement(
                    MeasurementAssemblage::from_operators(ops)
                        .map_err(|e| FormatError::Structure(e.to_string()))?,
                )
            }
        }
        Kind::Instrument => {
            let mut elements = Vec::with_capacity(file.settings);
            for (x, &n) in file.outcomes.iter().enumerate() {
                let mut setting = Vec::with_capacity(n);
                for a in 0..n {
                    let (v, key) = value_of(x, a)?;
                    let ms: Vec<Matrix> = serde_json::from_value(v.clone())
                        .map_err(|e| element_error(&key, e.to_string()))?;
                    let kraus = ms
                        .iter()
                        .map(|m| {
                            to_matrix(m).and_then(|c| check_shape(&c, dim_out, dim).map(|_| c))
                        })
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|msg| element_error(&key, msg))?;
                    if kraus.is_empty() {
                        return Err(element_error(&key, "no Kraus operators".into()));
                    }
                    setting.push(kraus);
                }
                elements.push(setting);
            }
            Assemblage::Instrument(
                InstrumentAssemblage::new(dim, dim_out, elements)
                    .map_err(|e| FormatError::Structure(e.to_string()))?,
            )
        }
    };
    let context = file
        .context
        .as_ref()
        .map(parse_context)
        .transpose()
        .map_err(|msg| FormatError::Structure(format!("context: {msg}")))?;
    Ok(Parsed {
        assemblage,
        context,
    })
}

fn context_file(c: &Context) -> ContextFile {
    match c {
        Context::Observable(h) => ContextFile {
            observable: Some(from_matrix(h.as_matrix())),
            basis: None,
        },
        Context::Basis(b) => ContextFile {
            observable: None,
            basis: Some(
                b.projectors()
                    .iter()
                    .map(|p| from_matrix(p.as_matrix()))
                    .collect(),
            ),
        },
    }
}

pub fn to_file(assemblage: &Assemblage, context: Option<&Context>) -> AssemblageFile {
    let mut elements = BTreeMap::new();
    let (kind, dim, dim_out, outcomes) = match assemblage {
        Assemblage::State(s) => {
            for (x, setting) in s.elements().iter().enumerate() {
                for (a, e) in setting.iter().enumerate() {
                    let m = from_matrix(e.as_hermitian().as_matrix());
                    elements.insert(format!("{x}:{a}"), serde_json::to_value(m).expect("finite"));
                }
            }
            (Kind::State, s.dim(), None, s.outcomes())
        }
        Assemblage::Measurement(mm) => {
            for (x, setting) in mm.elements().iter().enumerate() {
                for (a, e) in setting.iter().enumerate() {
                    let m = from_matrix(e.as_matrix());
                    elements.insert(format!("{x}:{a}"), serde_json::to_value(m).expect("finite"));
                }
            }
            (Kind::Measurement, mm.dim(), None, mm.outcomes())
        }
        Assemblage::Instrument(inst) => {
            for (x, setting) in inst.elements().iter().enumerate() {
                for (a, ks) in setting.iter().enumerate() {
                    let ms: Vec<Matrix> = ks.iter().map(from_matrix).collect();
                    elements.insert(
                        format!("{x}:{a}"),
                        serde_json::to_value(ms).expect("finite"),
                    );
                }
            }
            let out = (inst.dim_out() != inst.dim_in()).then_some(inst.dim_out());
            (Kind::Instrument, inst.dim_in(), out, inst.outcomes())
        }
    };
    AssemblageFile {
        kind,
        dim,
        dim_out,
        settings: outcomes.len(),
        outcomes,
        elements,
        context: context.map(context_file),
    }
}

pub fn to_json(assemblage: &Assemblage, context: Option<&Context>) -> String {
    serde_json::to_string_pretty(&to_file(assemblage, context)).expect("serializable")
}

/// Shortest decimal that round-trips the value rounded to 12 significant
/// digits. Plain notation for magnitudes in `[1e-5, 1e15)`, exponent
/// notation otherwise.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("valid float");
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}
