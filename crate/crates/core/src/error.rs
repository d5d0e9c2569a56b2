use thiserror::Error;

use crate::jet::JetError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("({x:?}, {y:?}) is outside the domain of {label}")]
    Domain {
        label: String,
        x: Vec<f64>,
        y: Vec<f64>,
    },
    #[error("singular metric: |det g| = {det:e} is below {threshold:e}")]
    SingularMetric { det: f64, threshold: f64 },
    #[error("degenerate Berwald frame: rho = {0:e}")]
    DegenerateFrame(f64),
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate f-form: {0}")]
    DegenerateFForm(String),
    #[error("scalar is not 0-homogeneous: L;1 = {0:e}")]
    NotZeroHomogeneous(f64),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
