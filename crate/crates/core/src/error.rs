use thiserror::Error;

/// Errors across the toolkit. Validation rejects rather than repairs, so
/// every error names the offending input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability vector is empty")]
    EmptyPmf,
    #[error("entry {index} is {value}, negative beyond tolerance")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, outside 1 ± {tolerance}")]
    BadSum { sum: f64, tolerance: f64 },
    #[error("alphabet size mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{name} = {value} lies outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("component {component} sums to {sum}, outside [0, 1]")]
    SumOutOfRange { component: char, sum: f64 },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("postulation {which} requires {requirement}")]
    ConfigMismatch {
        which: &'static str,
        requirement: &'static str,
    },
}
