use thiserror::Error;

/// Errors produced by the numerical layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("evaluation failed in `{op}` (value part {value})")]
    Evaluation { op: &'static str, value: f64 },

    #[error("evaluation failed at {at:?}: {source}")]
    EvaluationAt { at: Vec<f64>, source: Box<Error> },

    #[error("degenerate chart at u = {0:?}: all normal minors vanish")]
    DegenerateChart(Vec<f64>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("capability missing: {0}")]
    Capability(String),
}

impl Error {
    /// Attach the evaluation point to an error raised while evaluating an integrand.
    pub fn at(self, x: &[f64]) -> Self {
        match self {
            e @ Error::EvaluationAt { .. } => e,
            e => Error::EvaluationAt { at: x.to_vec(), source: Box::new(e) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
