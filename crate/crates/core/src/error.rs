use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inconsistent focal lengths: F = {folded} mm but 2f + h = {expected} mm")]
    InconsistentFocal { folded: f64, expected: f64 },

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid aperture: {0}")]
    InvalidAperture(String),

    #[error("point ({x}, {y}, {z}) is not on the feed plane z = {plane_z}")]
    OffFeedPlane { x: f64, y: f64, z: f64, plane_z: f64 },

    #[error("feed lies on the aperture plane z = {0} mm")]
    DegenerateFeed(f64),

    #[error("virtual feeds are not mirror-symmetric about the aperture axis")]
    AsymmetricFeeds,

    #[error("angle {value} deg outside {range}")]
    AngleOutOfRange { value: f64, range: &'static str },

    #[error("all scattering coefficients are zero")]
    ZeroScattering,

    #[error("parameter {value} mm outside curve range [{min}, {max}] mm")]
    ParameterOutOfRange { value: f64, min: f64, max: f64 },

    #[error("invalid phase curve: {0}")]
    InvalidCurve(String),

    #[error("observation point coincides with the feed")]
    ZeroDistance,

    #[error("aperture field is empty")]
    EmptyField,

    #[error("pattern is identically zero")]
    ZeroPattern,

    #[error("pattern has no resolvable main lobe: {0}")]
    NoMainLobe(String),

    #[error("sampling step {step} deg does not divide {range} deg evenly")]
    BadSampling { step: f64, range: f64 },

    #[error("unknown feed '{0}'")]
    UnknownFeed(String),

    #[error("feed {feed} is not allowed in the {state} state (allowed: {allowed})")]
    IllegalFeed {
        feed: String,
        state: &'static str,
        allowed: String,
    },

    #[error("the {state} state does not radiate through the {side} aperture")]
    InactiveSide { state: &'static str, side: &'static str },

    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    FileFormat { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Usage or configuration problems, as opposed to domain failures.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. }
                | Error::Config(_)
                | Error::Io { .. }
                | Error::FileFormat { .. }
                | Error::InvalidCurve(_)
        )
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}
