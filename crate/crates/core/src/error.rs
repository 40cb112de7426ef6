use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unrealizable wiring: {0}")]
    UnrealizableWiring(String),

    #[error("graph too large: {half_edges} half-edges exceeds the budget of {budget}")]
    MemoryBudget { half_edges: u128, budget: usize },

    #[error("vertex {0} lies on the truncation boundary")]
    BoundaryVertex(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("radius too small: need at least {needed}, graph has {radius}")]
    RadiusTooSmall { needed: usize, radius: usize },

    #[error("state cannot be represented: {0}")]
    Unrepresentable(String),

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("parameters out of range: {0}")]
    ParamsOutOfRange(String),

    #[error("x = {x} lies outside the support [{lo}, {hi}]")]
    OutOfSupport { x: f64, lo: f64, hi: f64 },

    #[error("x = {0} lies inside the support band; closed form undefined")]
    OutOfDomain(f64),

    #[error("no localization: {0}")]
    NotLocalized(String),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::UnrealizableWiring(_) => "UnrealizableWiring",
            Error::MemoryBudget { .. } => "MemoryBudget",
            Error::BoundaryVertex(_) => "BoundaryVertex",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RadiusTooSmall { .. } => "RadiusTooSmall",
            Error::Unrepresentable(_) => "Unrepresentable",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::ParamsOutOfRange(_) => "ParamsOutOfRange",
            Error::OutOfSupport { .. } => "OutOfSupport",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::NotLocalized(_) => "NotLocalized",
        }
    }
}
