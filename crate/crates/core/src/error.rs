use thiserror::Error;

/// Errors surfaced by instance construction, feasibility checks, and the
/// schedulers. Parameter violations are reported before any work is done.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown link id {0}")]
    UnknownLink(usize),
    #[error("zero-length link {0}")]
    ZeroLengthLink(usize),
    #[error("operation needs two distinct links, got {0} twice")]
    SameLink(usize),
    #[error("instance has no links")]
    EmptyInstance,
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("unsupported instance file version {0}")]
    UnsupportedVersion(u64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("weak link {link} under assignment: power {power} <= beta*noise*length^alpha = {floor}")]
    WeakLink { link: usize, power: f64, floor: f64 },
    #[error("links {i} and {j} are at distance zero")]
    ZeroDistance { i: usize, j: usize },
    #[error("input set is not {p}-feasible under the given assignment")]
    NotPFeasible { p: f64 },
    #[error("strengthening needed {parts} parts, exceeding the bound {bound}")]
    PartitionBound { parts: usize, bound: usize },
    #[error("tau interval for delta {delta} is empty (delta0 = {delta0})")]
    EmptyTauInterval { delta: f64, delta0: f64 },
    #[error("tau {tau} outside the valid interval ({lo}, {hi})")]
    TauOutsideInterval { tau: f64, lo: f64, hi: f64 },
    #[error("path-loss exponent {alpha} must exceed the doubling dimension {m}")]
    AlphaNotFading { alpha: f64, m: f64 },
    #[error("instance metric does not carry a doubling dimension; conflict scheduling needs a euclidean space")]
    DimensionUnknown,
    #[error("{what} limited to {cap} links, got {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },
    #[error("calibration grid exhausted above gamma = {0}")]
    GridExhausted(f64),
    #[error("construction constraint unsatisfiable: {0}")]
    ConstraintUnsatisfiable(String),
    #[error("weak-link reduction requires positive ambient noise")]
    NoiseRequired,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
