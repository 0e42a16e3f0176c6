use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word too short: need {needed} letters, got {got}")]
    WordTooShort { needed: usize, got: usize },

    #[error("word is not admissible")]
    Inadmissible,

    #[error("cylinder count {count} exceeds the configured cap {cap}")]
    CylinderCap { count: usize, cap: usize },

    #[error("truncated state graph is not strongly connected")]
    NotIrreducible,

    #[error("no convergence after {iterations} iterations (last gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("all cylinder weights underflowed")]
    Underflow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0} lies on a partition boundary")]
    Boundary(f64),

    #[error("branch {label} is not contracting (bound {bound})")]
    NotContracting { label: String, bound: f64 },

    #[error("prefix does not contract below tolerance after {len} letters")]
    NonContractingPrefix { len: usize },

    #[error("digit budget exhausted: {0}")]
    DigitBudget(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("no sign change of the pressure on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("potential is not summable at t = {t}")]
    NotSummable { t: f64 },

    #[error("insufficient ball counts at every radius")]
    InsufficientCounts,

    #[error("slope fit residual {residual:e} exceeds {limit:e}")]
    FitResidual { residual: f64, limit: f64 },

    #[error("orbit escaped the domain at step {step}")]
    OrbitEscape { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
