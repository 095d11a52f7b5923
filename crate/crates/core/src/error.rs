use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the stage that produced them so callers (and the
/// CLI exit-code mapping) can tell configuration problems from numerical ones.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the chart domain")]
    OutsideDomain(f64, f64),

    #[error("metric is not positive definite at ({u}, {v}): g11={g11}, g12={g12}, g22={g22}")]
    NotPositiveDefinite {
        u: f64,
        v: f64,
        g11: f64,
        g12: f64,
        g22: f64,
    },

    #[error("metric is ill-conditioned at ({0}, {1}) (det below threshold)")]
    Conditioning(f64, f64),

    #[error("degenerate elliptic coordinates: {0}")]
    DegenerateCoordinates(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("geodesic left the chart domain after length {0}")]
    DomainExit(f64),

    #[error("boundary value problem did not converge: {0}")]
    BvpFailure(String),

    #[error("points are farther apart than the convexity radius ({distance} > {radius})")]
    BeyondConvexityRadius { distance: f64, radius: f64 },

    #[error("curve is not strictly geodesically convex: {0}")]
    NotConvex(String),

    #[error("zero-speed parametrization at parameter {0}")]
    ZeroSpeed(f64),

    #[error("tangent geodesics do not cross inside the trust region: {0}")]
    TooFar(String),

    #[error("grazing shot rejected (|p| = {0})")]
    Grazing(f64),

    #[error("value {value} outside the admissible excess range (max {max})")]
    ExcessRange { value: f64, max: f64 },

    #[error(
        "rotation number {rho} is within {distance:e} of {num}/{den}; conjugacy is ill-conditioned"
    )]
    IllConditionedConjugacy {
        rho: f64,
        num: u32,
        den: u32,
        distance: f64,
    },

    #[error("reconstruction failed at stage {stage}: residual {residual:e} exceeds {limit:e}")]
    ReconstructionFailed {
        stage: String,
        residual: f64,
        limit: f64,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("aspect ratios too close: {0}")]
    AspectRatiosTooClose(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than by a
    /// failed numerical check.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::OutsideDomain(..)
                | Error::NotPositiveDefinite { .. }
                | Error::DegenerateCoordinates(_)
                | Error::InvalidParameter(_)
                | Error::NotConvex(_)
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
