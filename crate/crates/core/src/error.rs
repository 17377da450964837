use alloc::string::String;

/// Failures surfaced by the numerical core.
///
/// Warnings that do not abort a computation (guard violations of the
/// obstacle problem, stencil repairs) are carried in the result types
/// instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("affine image has no overlap with the source field")]
    EmptyImage,
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("non-monotone stencil: {0}")]
    NonMonotoneStencil(String),
    #[error("initial guess is not a discrete supersolution: {0}")]
    InvalidInitialGuess(String),
    #[error("empty contact set: no free boundary")]
    EmptyFreeBoundary,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("section of height {height:e} reaches the domain boundary")]
    SectionEscapes { height: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable identifier used by the experiment runner in error reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::EmptyImage => "EmptyImage",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NonMonotoneStencil(_) => "NonMonotoneStencil",
            Error::InvalidInitialGuess(_) => "InvalidInitialGuess",
            Error::EmptyFreeBoundary => "EmptyFreeBoundary",
            Error::PreconditionViolation(_) => "PreconditionViolation",
            Error::SectionEscapes { .. } => "SectionEscapes",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
