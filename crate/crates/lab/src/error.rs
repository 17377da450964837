use std::path::PathBuf;

/// Failures of a run, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{module} failed: {}: {source}", source.name())]
    Solver {
        module: &'static str,
        source: lma_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Schema { .. } => 2,
            LabError::Solver { .. } => 3,
            LabError::Io { .. } | LabError::Data(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Tags a core error with the module that raised it.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, LabError>;
}

impl<T> InModule<T> for lma_core::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, LabError> {
        self.map_err(|source| LabError::Solver { module, source })
    }
}
