use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("undefined heading: points coincide")]
    UndefinedHeading,
}

/// A configuration that cannot be simulated. Messages always name the field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("invalid `delta`: delta ({delta}) must exceed epsilon ({epsilon}) unless degenerate bands are allowed")]
    DegenerateBand { delta: f64, epsilon: f64 },
    #[error("invalid `population`: world too crowded, placement gave up after {attempts} attempts")]
    WorldTooCrowded { attempts: usize },
}

impl ConfigError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field, reason: reason.into() }
    }

    /// Name of the offending configuration field.
    pub fn field(&self) -> &'static str {
        match self {
            ConfigError::Invalid { field, .. } => field,
            ConfigError::DegenerateBand { .. } => "delta",
            ConfigError::WorldTooCrowded { .. } => "population",
        }
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("sweep spec: {0}")]
    Spec(String),
    #[error("run record: {0}")]
    Record(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(String),
    #[error("unknown delay policy `{0}` (expected none, stability or stability+K)")]
    Delay(String),
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError::Csv(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown grouping dimension `{0}` (expected one of: {1})")]
    UnknownDimension(String, &'static str),
    #[error("unknown view `{0}` (expected one of: {1})")]
    UnknownView(String, &'static str),
    #[error("empty sweep result")]
    EmptyResult,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
