//! Error type shared by every module.

use core::fmt;

/// Failure modes of the configuration algebra, the solver and the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The Bernoulli argument vanished or went negative.
    VacuumState,
    /// The incident shock is not entropy admissible (`rho1 <= rho0`).
    InvalidShock,
    /// A scalar parameter lies outside its admissible range.
    InvalidParameter(&'static str),
    /// The state (2) root scan found no sign change.
    NoRegularReflection,
    /// The reflected shock line misses the sonic circle.
    NoSonicIntersection,
    /// Polar coordinates requested at the circle center.
    CenterSingularity,
    /// Argument outside the configured interval.
    OutOfRange,
    /// A boundary trace left the domain of the shock function.
    OutsideDomain,
    /// Picard iteration did not reach the tolerance.
    NoConvergence { iterations: usize, residual: f64 },
    /// The ellipticity clamp was active on too many nodes.
    EllipticityLoss { fraction: f64 },
    /// The free-boundary row produced a non-finite update.
    ShockConditionDiverged,
    /// A logarithmic fit met a non-positive sample.
    NonpositiveSamples,
    /// The grid does not resolve the region a diagnostic needs.
    InsufficientResolution,
    /// The admissible parameter interval is empty.
    EmptyInterval,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VacuumState => write!(f, "vacuum state: Bernoulli argument is not positive"),
            Error::InvalidShock => write!(f, "invalid incident shock: rho1 must exceed rho0"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NoRegularReflection => write!(f, "no regular reflection: state (2) has no root"),
            Error::NoSonicIntersection => write!(f, "reflected shock misses the sonic circle"),
            Error::CenterSingularity => write!(f, "point coincides with the sonic circle center"),
            Error::OutOfRange => write!(f, "argument out of range"),
            Error::OutsideDomain => write!(f, "sample outside the domain of the shock function"),
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::EllipticityLoss { fraction } => write!(
                f,
                "ellipticity clamp active on {:.1}% of nodes",
                100.0 * fraction
            ),
            Error::ShockConditionDiverged => write!(f, "shock boundary condition diverged"),
            Error::NonpositiveSamples => write!(f, "non-positive samples in fit window"),
            Error::InsufficientResolution => write!(f, "insufficient grid resolution"),
            Error::EmptyInterval => write!(f, "admissible parameter interval is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
