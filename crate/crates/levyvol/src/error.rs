use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("density grid needs {requested} points but the limit is {max}")]
    ResolutionUnachievable { requested: usize, max: usize },

    /// A debiasing denominator was exactly zero; the carried value is the
    /// flagged fallback (the inner estimate at the same threshold).
    #[error("degenerate debiasing correction (zero denominator); fallback value {fallback}")]
    DegenerateCorrection { fallback: f64 },

    #[error("estimator undefined: {0}")]
    EstimatorUndefined(String),

    #[error("rejection sampler stalled after {0} consecutive rejections")]
    RejectionLoopStalled(u64),

    #[error("tail certification failed: {0}")]
    CertificationFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    TomlSerialize(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 I/O, 4 estimator-undefined.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::EstimatorUndefined(_) | Error::DegenerateCorrection { .. } => 4,
            _ => 2,
        }
    }
}
