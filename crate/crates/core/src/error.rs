use std::path::PathBuf;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("invalid graph: {0}")]
    Validation(ValidationReport),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("node type `{0}` is not reachable from the target type in the schema")]
    Unreachable(String),

    #[error("PPR did not converge within {pushes} pushes (residual L1 norm {residual:.3e})")]
    NotConverged { pushes: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Pipeline stage the error was raised in, if tagged.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// The error without its stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait InStage<T> {
    fn in_stage(self, stage: &'static str) -> Result<T>;
}

impl<T> InStage<T> for Result<T> {
    fn in_stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            tagged @ Error::Stage { .. } => tagged,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        })
    }
}
