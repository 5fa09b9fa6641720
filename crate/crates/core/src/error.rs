use std::path::PathBuf;

use crate::nmi::Space;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no valid two-segment segmentation for an abstract of {n} sentence(s)")]
    NoValidSegmentation { n: usize },

    #[error("the {0} space is empty")]
    DegenerateSpace(Space),

    #[error("NMI normalizer is zero (premise entropy {premise_bits}, conclusion entropy {conclusion_bits})")]
    DegenerateNormalizer {
        premise_bits: f64,
        conclusion_bits: f64,
    },

    #[error("degenerate statistical test: {0}")]
    DegenerateTest(String),

    #[error("unknown abstract id `{0}`")]
    UnknownId(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
