use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index must be at least 1")]
    IndexZero,
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("malformed parameters: {0}")]
    MalformedParams(String),
    #[error("tabulated data exhausted at index {0}")]
    TableExhausted(u64),
    #[error("argument below bijectivity threshold ({threshold})")]
    BelowThreshold { threshold: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("flags absent: {0}")]
    FlagsAbsent(&'static str),
    #[error("pole of zeta at s = 1")]
    Pole,
    #[error("zero crossing near sigma = {sigma}, t = {t}: {reason}")]
    ZeroCrossing { sigma: f64, t: f64, reason: &'static str },
    #[error("f' is not monotone on the interval")]
    NotMonotone,
    #[error("repeated frequency {0}")]
    RepeatedFrequency(f64),
    #[error("duplicate index {0} in permutation prefix")]
    DuplicateIndex(u64),
    #[error("sign pattern exhausted: no {0} term within the index budget")]
    PatternExhausted(&'static str),
    #[error("mismatched observables")]
    MismatchedObservables,
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of the computation itself (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Pole | Error::ZeroCrossing { .. } | Error::Numeric(_) | Error::PatternExhausted(_))
    }
}
