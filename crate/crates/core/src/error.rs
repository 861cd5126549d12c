use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("invalid interval ({0}, {1}): left endpoint must be below right endpoint")]
    InvalidInterval(f64, f64),

    #[error("weight vanishes; σ undefined in numeric mode (piece {piece} on ({left}, {right}))")]
    VanishingWeight { piece: usize, left: f64, right: f64 },

    #[error("no mass to halve on ({0}, {1})")]
    NoMass(f64, f64),

    #[error("quadrature did not converge: best estimate {estimate}, estimated error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("refinement did not converge: best estimate {estimate}, relative change {change}")]
    Refinement { estimate: f64, change: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
