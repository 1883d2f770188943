use thiserror::Error;

/// Every failure the studio can surface. `code()` gives the stable
/// kebab-case identifier used in logs and HTTP error bodies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gateway unavailable: {0}")]
    GatewayUnavailable(String),

    #[error("no fixture recorded for request {key}")]
    FixtureMissing { key: String },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("structured output could not be parsed: {0}")]
    StructuredParse(String),

    #[error("no results for {0:?}")]
    EmptyResult(String),

    #[error("page missing: {0}")]
    PageMissing(String),

    #[error("malformed edit statistics for {0}")]
    MalformedStats(String),

    #[error("generation shortfall: wanted {wanted}, got {got}")]
    GenerationShortfall { wanted: usize, got: usize },

    #[error("interpretation failed: {0}")]
    InterpretationFailed(String),

    #[error("rewrite failed for some calls; succeeded indices {succeeded:?}")]
    PartialRewrite { succeeded: Vec<usize> },

    #[error("stage violation: {0}")]
    StageViolation(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("accept gate not elapsed: {elapsed_ms} ms of {required_ms} ms")]
    GateNotElapsed { elapsed_ms: i64, required_ms: i64 },

    #[error("interpretation {0} was never expanded")]
    NotExpanded(String),

    #[error("collage has not been initialized")]
    CollageNotInitialized,

    #[error("storage: {0}")]
    Storage(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::GatewayUnavailable(_) => "gateway-unavailable",
            Error::FixtureMissing { .. } => "fixture-missing",
            Error::InvalidRequest(_) => "invalid-request",
            Error::InvalidInput(_) => "invalid-input",
            Error::StructuredParse(_) => "structured-parse",
            Error::EmptyResult(_) => "empty-result",
            Error::PageMissing(_) => "page-missing",
            Error::MalformedStats(_) => "malformed-stats",
            Error::GenerationShortfall { .. } => "generation-shortfall",
            Error::InterpretationFailed(_) => "interpretation-failed",
            Error::PartialRewrite { .. } => "partial-rewrite",
            Error::StageViolation(_) => "stage-violation",
            Error::NotFound(_) => "not-found",
            Error::GateNotElapsed { .. } => "gate-not-elapsed",
            Error::NotExpanded(_) => "not-expanded",
            Error::CollageNotInitialized => "collage-not-initialized",
            Error::Storage(_) => "storage",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidRequest(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Storage(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
