use thiserror::Error;

/// Errors surfaced by the library. Contract violations inside the exact
/// algebra (mismatched color counts fed to an operator, for instance) panic
/// instead: they are programming errors, not runtime conditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree cap exceeded: {context} needs degree {needed}, cap is {cap}")]
    CapExceeded {
        context: &'static str,
        needed: usize,
        cap: usize,
    },
    #[error("truncation order insufficient: {context} needs order {needed}, have {have}")]
    OrderExceeded {
        context: &'static str,
        needed: u32,
        have: u32,
    },
    #[error("enumeration budget exceeded: {estimate} pairings, budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("half-edge {half_edge} is unpaired")]
    UnpairedHalfEdge { half_edge: usize },
    #[error("color mismatch: half-edges {a} and {b} carry different colors")]
    ColorMismatch { a: usize, b: usize },
    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },
    #[error("convexity validation failed: {witness}")]
    NotConvex { witness: String },
    #[error("structured/raw potential form mismatch: {0}")]
    ConvexityForm(String),
    #[error("non-finite energy encountered at step {step} (step size too large?)")]
    NonFiniteEnergy { step: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("quadrature tail does not decay: potential not integrable")]
    NonIntegrable,
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
