use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    #[error("clonality signal {0} is outside [0, 1]")]
    SignalDomain(f64),

    #[error("marker id must be nonempty")]
    EmptyMarkerId,

    #[error("marker `{0}` is not in the catalog")]
    CatalogMiss(String),

    #[error("duplicate marker `{0}`")]
    DuplicateMarker(String),

    #[error("no mutations observed; test undefined")]
    NoMutations,

    #[error("{n} markers exceed the exact-enumeration limit of {max}; use Monte Carlo mode")]
    TooLargeForExact { n: usize, max: usize },

    #[error("missing frequency records for: {}", .0.join(", "))]
    MissingRecords(Vec<String>),

    #[error("marker `{0}` has a combined cohort size of zero")]
    ZeroDenominator(String),

    #[error("invalid counts for marker `{0}`: mutated exceeds total")]
    InvalidCounts(String),

    #[error("unknown preset `{name}`; known presets: {known}")]
    UnknownPreset { name: String, known: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
