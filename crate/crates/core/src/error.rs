use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("peak bound requires a library of N >= K_R files (N = {files}, K_R = {receivers})")]
    InfeasibleLibrary { files: u32, receivers: u32 },

    #[error("enumeration of {requested} demand vectors exceeds the cap of {cap}; use sampling instead")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("placement problem is infeasible: {0}")]
    Infeasible(String),

    #[error("a reference curve named {0:?} is already registered")]
    DuplicateName(String),

    #[error("reference curve {0:?} is unavailable for this configuration")]
    Unavailable(String),

    #[error("unknown reference curve {0:?}")]
    UnknownCurve(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
