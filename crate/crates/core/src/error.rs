//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("empty corpus: no tokens after preprocessing")]
    EmptyCorpus,

    #[error("{what} must be {requirement}, got {got}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        got: String,
    },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("co-occurrence entry ({row}, {col}) is zero or negative; log-weighting requires positive counts")]
    NonPositiveCount { row: usize, col: usize },

    #[error("softmax scores are not finite for word index {word}")]
    Overflow { word: usize },

    #[error("h_inverse domain violation at alpha={alpha}: component {index} = {value}")]
    InverseDomain {
        alpha: f64,
        index: usize,
        value: f64,
    },

    #[error("alpha-geodesic leaves the simplex domain at alpha={alpha}, t={t}")]
    GeodesicDomain { alpha: f64, t: f64 },

    #[error("vector is not tangent to the simplex: component sum {sum} exceeds tolerance")]
    NotTangent { sum: f64 },

    #[error("Fisher matrix is rank deficient beyond regularization: effective rank {effective_rank} of {dim}")]
    RankDeficient { effective_rank: usize, dim: usize },

    #[error("alpha must be finite here, got {0}")]
    NonFiniteAlpha(f64),

    #[error("reference kind '{0}' requires a co-occurrence matrix")]
    MissingCooccurrence(&'static str),

    #[error("similarity is undefined: {0}")]
    UndefinedSimilarity(String),

    #[error("vocabulary too small for analogy solving: {size} < 4")]
    InsufficientVocabulary { size: usize },

    #[error("word index {index} out of range for vocabulary of size {size}")]
    WordIndexOutOfRange { index: usize, size: usize },

    #[error("Spearman correlation undefined: {0} input is constant")]
    UndefinedCorrelation(&'static str),

    #[error("no dataset pairs could be evaluated (all {skipped} skipped)")]
    EmptyEvaluation { skipped: usize },

    #[error("PCA needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid similarity method '{0}': {1}")]
    InvalidMethod(String, String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
