//! Error type shared across the numeric core.

use core::fmt;

/// Everything that can go wrong in the numeric core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A field contained NaN or infinity.
    NonFiniteField,
    /// Field length does not match its background grid.
    ShapeMismatch { expected: usize, got: usize },
    /// Two fields live on different backgrounds.
    BackgroundMismatch,
    /// A tensor used as a metric failed the SPD check at a grid point.
    NotPositiveDefinite { i: usize, j: usize },
    /// The adaptive step controller shrank dt below 1e-14·dt_init.
    StepSizeCollapse { t: f64, dt: f64 },
    /// Jacobian determinant of a grid diffeomorphism dropped to ≤ 0.
    DiffeoDegenerated,
    /// Snapshot times are not uniformly spaced.
    NonUniformSnapshots,
    /// Not enough data for the requested operation.
    TooFewSamples { needed: usize, got: usize },
    /// Calabi energy must be positive on the whole fit window.
    NonPositiveCalabi,
    /// An operation is only defined on one of the two backgrounds.
    UnsupportedBackground(&'static str),
    /// Invalid parameter value.
    InvalidParam(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteField => write!(f, "non-finite field"),
            Error::ShapeMismatch { expected, got } => {
                write!(f, "field shape mismatch: expected {expected} values, got {got}")
            }
            Error::BackgroundMismatch => write!(f, "fields live on different backgrounds"),
            Error::NotPositiveDefinite { i, j } => {
                write!(f, "metric not positive definite at grid point ({i},{j})")
            }
            Error::StepSizeCollapse { t, dt } => {
                write!(f, "step-size collapse at t = {t} (dt = {dt})")
            }
            Error::DiffeoDegenerated => write!(f, "diffeomorphism degenerated"),
            Error::NonUniformSnapshots => write!(f, "snapshots are not uniformly spaced"),
            Error::TooFewSamples { needed, got } => {
                write!(f, "needs at least {needed} samples, got {got}")
            }
            Error::NonPositiveCalabi => write!(f, "calabi energy not positive on fit window"),
            Error::UnsupportedBackground(op) => write!(f, "{op}: unsupported background"),
            Error::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
