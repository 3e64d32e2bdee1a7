use std::path::PathBuf;

/// Errors raised by models, searches, estimators and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate covariance: variance {0} on axis {1} is not positive")]
    DegenerateCovariance(f64, usize),

    #[error("mixture needs at least one component")]
    EmptyMixture,

    #[error("non-finite search objective at {at}")]
    NonFiniteObjective { at: String },

    #[error("proposal assigns zero mass to drawn point {at}")]
    ZeroProposalMass { at: String },

    #[error("non-finite weight {weight} at {at}")]
    NonFiniteWeight { weight: f64, at: String },

    #[error("direct weighting needs an exactly normalized target")]
    MissingNormalizer,

    #[error("path node {index} has inward branching factor 0")]
    ZeroBranchFactor { index: usize },

    #[error("path depth {depth} is not below the block limit m = {m}")]
    DepthExceeded { depth: usize, m: usize },

    #[error("predecessor tree exceeded {cap} nodes; successor relation is not loop-free")]
    TreeTooLarge { cap: usize },

    #[error("weights sum to zero; no usable mass in the sample")]
    NoUsableMass,

    #[error("target does not provide {0}")]
    MissingCapability(&'static str),

    #[error("density ratio {ratio} exceeds rejection envelope {envelope}")]
    EnvelopeViolated { ratio: f64, envelope: f64 },

    #[error("rejection sampler gave up after {0} proposals")]
    RejectionStalled(u64),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("method '{method}' is not available for scenario '{scenario}'")]
    UnsupportedMethod { method: String, scenario: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("repetition {rep} failed")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
