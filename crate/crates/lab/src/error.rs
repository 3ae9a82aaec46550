use legendre_core::error::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("cannot load family: {0}")]
    FamilyParse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("computation failed: {0}")]
    Compute(#[from] CoreError),
    #[error("Betti and division-polynomial torsion parameters disagree for N = {0}")]
    OracleMismatch(u32),
    #[error("checkpoint does not match this configuration: {0}")]
    Resume(String),
}

impl LabError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::FamilyParse(_) => "FAMILY_PARSE",
            LabError::Config(_) => "CONFIG",
            LabError::Io(_) => "IO",
            LabError::Compute(e) => match e {
                CoreError::PrecisionInsufficient => "PRECISION_INSUFFICIENT",
                CoreError::CmUnsupported => "CM_UNSUPPORTED",
                CoreError::InvalidDisc(_) => "INVALID_DISC",
                _ => "COMPUTE",
            },
            LabError::OracleMismatch(_) => "ORACLE_MISMATCH",
            LabError::Resume(_) => "RESUME",
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(std::io::Error::other(e))
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(std::io::Error::other(e))
    }
}
