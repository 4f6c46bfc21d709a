use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("incomplete design: {0}")]
    IncompleteDesign(String),
    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}
