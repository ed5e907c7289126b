//! Runge–Kutta integrators for ODEs on the unit sphere built from the
//! exponential map and spherical linear interpolation, together with the
//! projected Cartesian baselines and two applications: eikonal ray tracing
//! and p-harmonic flow of sphere-valued curves.

pub mod baselines;
pub mod eikonal;
pub mod error;
pub mod field;
pub mod geom;
pub mod integrators;
pub mod pharmonic;
pub mod problems;
pub mod quat;

pub use error::{Error, Result};
pub use field::VelocityField;
pub use geom::{TangentVector, UnitVector3, Vec3};
pub use integrators::SchemeId;
