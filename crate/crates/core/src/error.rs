use thiserror::Error;

/// Errors raised by the operators, the smoothness machinery and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: pivot {pivot:e} below threshold at column {column}")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("malformed system: {0}")]
    MalformedSystem(String),

    #[error("underdetermined fit: need at least 2 distinct abscissae")]
    UnderdeterminedFit,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample at singularity: f({x}) is not finite")]
    SampleAtSingularity { x: f64 },

    #[error("out of domain: node {x} outside [0, 1]")]
    OutOfDomain { x: f64 },

    #[error("order exceeds degree: r = {r} > n = {n}")]
    OrderExceedsDegree { r: usize, n: usize },

    #[error("unsupported order r = {0} (supported: 1..=5)")]
    UnsupportedOrder(usize),

    #[error("n = {n} too small for xi = {xi}: {reason}")]
    NTooSmall { n: usize, xi: f64, reason: String },

    #[error("node at singularity: f({x}) is not finite")]
    NodeAtSingularity { x: f64 },

    #[error("combination order too small: r = {0}, need r >= 2")]
    CombinationOrderTooSmall(usize),

    #[error("modulus undefined for unbounded corpus member `{0}`")]
    ModulusUndefined(String),

    #[error("no candidates: smoothing scale grid is empty")]
    NoCandidates,

    #[error("outside lemma hypothesis: {0}")]
    OutsideHypothesis(String),

    #[error("missing analytic derivative of order {order} for `{name}`")]
    MissingDerivative { name: String, order: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::InvalidParameter(_)
                | Error::UnsupportedOrder(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
