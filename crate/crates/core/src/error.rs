use alloc::string::String;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("path passes through a singular parameter value")]
    PathThroughSingularity,
    #[error("square-root branch cannot be tracked between consecutive waypoints")]
    BranchAmbiguous,
    #[error("addition of nearly equal x-coordinates is ambiguous at this precision")]
    NearCancellation,
    #[error("CM multipliers are only supported on E_{{-1}}")]
    CmUnsupported,
    #[error("parameter is singular (0 or 1)")]
    SingularParameter,
    #[error("parameter is within the configured margin of a singular value")]
    NearSingular,
    #[error("cleared polynomial degree {0} exceeds the cap")]
    DegreeOverflow(usize),
    #[error("iteration failed to converge")]
    NonConvergence,
    #[error("continuation step too large for unambiguous matching")]
    StepTooLarge,
    #[error("point at infinity has no finite logarithm")]
    PointAtInfinity,
    #[error("zero input")]
    ZeroInput,
    #[error("period basis is degenerate")]
    DegenerateBasis,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("candidate relations do not survive doubled precision")]
    PrecisionInsufficient,
    #[error("minimal polynomial is reducible")]
    ReducibleInput,
    #[error("Newton iteration diverged")]
    NewtonDivergence,
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid disc: {0}")]
    InvalidDisc(String),
}

pub type Result<T> = core::result::Result<T, Error>;
