use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// The trajectory left every bounded region or became non-finite.
    #[error("flow diverged near s = {s}: (x, y) = ({x}, {y})")]
    Divergence { s: f64, x: f64, y: f64 },
    #[error("step refinement did not converge after {halvings} halvings (last difference {difference:e})")]
    Refinement { halvings: u32, difference: f64 },
    #[error("invalid family: {0}")]
    Family(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type SimResult<T> = std::result::Result<T, SimError>;

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Csv(e.to_string())
    }
}
