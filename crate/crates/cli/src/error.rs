use skewalk_core::lattice::LatticeError;
use skewalk_core::oracle::OracleError;
use skewalk_core::verify::VerifyError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("computation failed: {0}")]
    Failed(String),
    #[error("unknown curve {0:?}")]
    UnknownCurve(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::ResourceLimit(_) => 3,
            _ => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::ResourceLimit { .. } => CliError::ResourceLimit(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::ResourceLimit { .. } => CliError::ResourceLimit(e.to_string()),
            OracleError::Lattice(l) => l.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Oracle(o) => o.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}
