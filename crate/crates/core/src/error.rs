use thiserror::Error;

/// Errors raised by the spherical primitives, steppers and applications.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot project a zero-length vector onto the sphere")]
    ZeroVector,

    #[error("vector has norm {norm}, expected a unit vector")]
    NotUnit { norm: f64 },

    #[error("vector is not tangent at its base point (normal component {normal})")]
    NotTangent { normal: f64 },

    #[error("points are (nearly) antipodal, separation {angle} rad: geodesic is not unique")]
    AntipodalPoints { angle: f64 },

    #[error("quaternion has zero norm")]
    ZeroQuaternion,

    #[error("quaternion logarithm undefined for a non-positive real quaternion")]
    LogBranchUndefined,

    #[error("stage {stage}: exponential-map step of length {length} exceeds the bound {limit}")]
    StepTooLarge { stage: usize, length: f64, limit: f64 },

    #[error("point is within {gap:e} of vortex center {center}")]
    NearPole { center: usize, gap: f64 },

    #[error("points do not lie in a common open hemisphere")]
    HemisphereViolation,

    #[error("Frechet mean did not converge after {iterations} iterations (gradient {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },

    #[error("wavefront polyline is degenerate (length {length:e})")]
    DegenerateFront { length: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ray {ray}: {source}")]
    AtRay {
        ray: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips step/ray annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::AtRay { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
