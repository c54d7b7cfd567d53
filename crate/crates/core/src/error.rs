use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("word size {0} is outside 2..=32")]
    WordSize(u32),
    #[error("rotation {r} out of range for {w}-bit words (allowed {min}..={max})")]
    Rotation { r: u32, w: u32, min: u32, max: u32 },
    #[error("value {value:#x} does not fit in {w} bits")]
    WordOverflow { value: u64, w: u32 },
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: u64,
        reason: &'static str,
    },
    #[error("search space of 2^{bits} exceeds the 2^{limit} guard; pass --force to run it anyway")]
    Infeasible { bits: u32, limit: u32 },
    #[error("word size mismatch: {left} vs {right} bits")]
    SpecMismatch { left: u32, right: u32 },
    #[error("malformed state encoding: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: u64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
