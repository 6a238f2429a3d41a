use thiserror::Error;

/// Errors produced anywhere in the witness pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is rank deficient (min eigenvalue {min_eigenvalue:.3e} <= {tolerance:.1e})")]
    RankDeficient { min_eigenvalue: f64, tolerance: f64 },

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("trace {trace} outside the allowed range")]
    InvalidTrace { trace: f64 },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid probability table: {0}")]
    NotStochastic(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid reference basis: {0}")]
    InvalidBasis(String),

    #[error("steering-equivalent observables undefined: marginal {0}")]
    SeoUndefined(Box<Error>),

    #[error("functional `{0}` has no exact concave roof; refusing to build an unsound witness")]
    InexactRoof(String),

    #[error("setting index {index} out of range ({settings} settings)")]
    InvalidSetting { index: usize, settings: usize },

    #[error("bracket [{lo}, {hi}] does not straddle a zero boundary")]
    Bracketing { lo: f64, hi: f64 },

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
