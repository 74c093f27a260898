use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch { what: &'static str, expected: usize, actual: usize },

    #[error("error-correction leak diverges at h(Q) = 1")]
    DivergentLeak,

    #[error("min-entropy bound is vacuous: Q + mu = {0} >= 0.5")]
    VacuousBound(f64),

    #[error("empty feasibility region (r <= 7/8): rate {0}")]
    EmptyFeasibilityRegion(f64),

    #[error("generator matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("desk-scale limit exceeded: {0}")]
    DeskScaleLimit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub(crate) fn check_range(name: &'static str, value: f64, range: &'static str, ok: bool) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
