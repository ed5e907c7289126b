//! Exact primitives on the unit sphere S².
//!
//! Every integrator in this crate is assembled from three closed-form maps:
//! radial projection, the exponential map and geodesic (SLERP) interpolation.
//! None of them needs an iterative solve, and the exponential map and SLERP
//! return points on the sphere up to rounding without any renormalization.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Neg;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Free vector in the embedding space R³.
pub type Vec3 = Vector3<f64>;

/// Norms below this are treated as zero by [`project`].
pub const ZERO_NORM: f64 = 1e-300;

/// Tolerance on `‖v‖ - 1` accepted by [`UnitVector3::try_from_unit`].
pub const UNIT_TOL: f64 = 1e-12;

/// Default tolerance on the normal component when tangency is enforced by rejection.
pub const TANGENT_TOL: f64 = 1e-10;

/// Below this angle the exponential map switches to its Taylor branch.
pub const EXP_SMALL_ANGLE: f64 = 1e-8;

/// Below this separation SLERP falls back to normalized linear interpolation.
pub const SLERP_SMALL_ANGLE: f64 = 1e-8;

/// SLERP rejects separations above `π - SLERP_ANTIPODAL_GAP`.
pub const SLERP_ANTIPODAL_GAP: f64 = 1e-8;

/// A point on the unit sphere.
#[derive(Clone, Copy, PartialEq)]
pub struct UnitVector3(Vec3);

impl UnitVector3 {
    pub const E1: UnitVector3 = UnitVector3(Vector3::new(1.0, 0.0, 0.0));
    pub const E2: UnitVector3 = UnitVector3(Vector3::new(0.0, 1.0, 0.0));
    pub const E3: UnitVector3 = UnitVector3(Vector3::new(0.0, 0.0, 1.0));

    /// Normalizes `(x, y, z)`.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        project(&Vec3::new(x, y, z))
    }

    /// Accepts `v` only if it already has unit norm within [`UNIT_TOL`].
    pub fn try_from_unit(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOL || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector3(v))
    }

    /// Wraps a vector the caller guarantees to be unit length up to rounding.
    pub(crate) fn new_unchecked(v: Vec3) -> Self {
        debug_assert!(
            (v.norm() - 1.0).abs() <= 1e-10,
            "not a unit vector: norm {}",
            v.norm()
        );
        UnitVector3(v)
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_vec(self) -> Vec3 {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    /// Point with polar angle `theta` (from +z) and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        UnitVector3(Vec3::new(st * cp, st * sp, ct))
    }

    /// Polar angle θ ∈ [0, π] and azimuth φ ∈ (-π, π].
    pub fn to_spherical(&self) -> (f64, f64) {
        let rho = (self.0.x * self.0.x + self.0.y * self.0.y).sqrt();
        (rho.atan2(self.0.z), self.0.y.atan2(self.0.x))
    }
}

impl Neg for UnitVector3 {
    type Output = UnitVector3;

    fn neg(self) -> UnitVector3 {
        UnitVector3(-self.0)
    }
}

impl fmt::Debug for UnitVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitVector3({}, {}, {})", self.0.x, self.0.y, self.0.z)
    }
}

impl From<UnitVector3> for Vec3 {
    fn from(p: UnitVector3) -> Vec3 {
        p.0
    }
}

/// How [`TangentVector::with_mode`] treats a normal component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TangencyMode {
    /// Remove the normal component.
    #[default]
    Project,
    /// Fail with [`Error::NotTangent`] if `|base · v|` exceeds the tolerance.
    Reject { tol: f64 },
}

/// A velocity in the tangent plane at `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    base: UnitVector3,
    v: Vec3,
}

impl TangentVector {
    /// Builds a tangent vector, projecting out any normal component.
    pub fn new(base: UnitVector3, v: Vec3) -> Self {
        let n = base.0.dot(&v);
        TangentVector {
            base,
            v: v - base.0 * n,
        }
    }

    pub fn with_mode(base: UnitVector3, v: Vec3, mode: TangencyMode) -> Result<Self> {
        match mode {
            TangencyMode::Project => Ok(Self::new(base, v)),
            TangencyMode::Reject { tol } => {
                let normal = base.0.dot(&v);
                if normal.abs() > tol {
                    Err(Error::NotTangent { normal })
                } else {
                    Ok(TangentVector { base, v })
                }
            }
        }
    }

    pub fn zero(base: UnitVector3) -> Self {
        TangentVector {
            base,
            v: Vec3::zeros(),
        }
    }

    pub fn base(&self) -> UnitVector3 {
        self.base
    }

    pub fn vector(&self) -> &Vec3 {
        &self.v
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            base: self.base,
            v: self.v * s,
        }
    }

    /// `exp_base(self)`.
    pub fn exp(&self) -> UnitVector3 {
        exp_map(&self.base, &self.v)
    }
}

/// Radial projection `v / ‖v‖`, the closest point on the sphere.
pub fn project(v: &Vec3) -> Result<UnitVector3> {
    let norm = v.norm();
    if !(norm >= ZERO_NORM) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(UnitVector3(v / norm))
}

/// Great-circle distance in radians, in `[0, π]`.
pub fn geodesic_distance(p: &UnitVector3, q: &UnitVector3) -> f64 {
    // atan2 form of arccos(p·q): exact near 0 and π where arccos loses digits.
    p.0.cross(&q.0).norm().atan2(p.0.dot(&q.0))
}

/// Exponential map `exp_p(v) = cos‖v‖ p + sin‖v‖ v/‖v‖` for `v` tangent at `p`.
pub fn exp_map(p: &UnitVector3, v: &Vec3) -> UnitVector3 {
    let theta = v.norm();
    let sinc = if theta < EXP_SMALL_ANGLE {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    };
    UnitVector3::new_unchecked(p.0 * theta.cos() + v * sinc)
}

/// Constant-speed interpolation along the minor great-circle arc from `p` (t = 0) to `q` (t = 1).
pub fn slerp(p: &UnitVector3, q: &UnitVector3, t: f64) -> Result<UnitVector3> {
    let omega = geodesic_distance(p, q);
    if omega > PI - SLERP_ANTIPODAL_GAP {
        return Err(Error::AntipodalPoints { angle: omega });
    }
    if omega < SLERP_SMALL_ANGLE {
        return project(&(p.0 * (1.0 - t) + q.0 * t));
    }
    let s = omega.sin();
    let a = ((1.0 - t) * omega).sin() / s;
    let b = (t * omega).sin() / s;
    Ok(UnitVector3::new_unchecked(p.0 * a + q.0 * b))
}

/// Outcome of [`same_hemisphere`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HemisphereRelation {
    /// All three points lie strictly on one side of the plane with normal
    /// `n = (b - c) × (b - a)`; `phi` is the common value `n · a = n · b = n · c`.
    Same { phi: f64 },
    /// The points lie on one great circle.
    Collinear,
}

impl HemisphereRelation {
    pub fn is_same(&self) -> bool {
        matches!(self, HemisphereRelation::Same { .. })
    }
}

/// Triple products smaller than this count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-14;

/// Tests whether three sphere points share an open hemisphere cut by a plane
/// through the origin that is parallel to the plane through the points.
pub fn same_hemisphere(a: &UnitVector3, b: &UnitVector3, c: &UnitVector3) -> HemisphereRelation {
    let phi = b.0.cross(&c.0).dot(&a.0);
    if phi.abs() <= COLLINEAR_TOL {
        HemisphereRelation::Collinear
    } else {
        HemisphereRelation::Same { phi }
    }
}

/// Inverse exponential map, used only by the Fréchet-mean solver.
pub(crate) fn log_map(p: &UnitVector3, q: &UnitVector3) -> Vec3 {
    let theta = geodesic_distance(p, q);
    let w = q.0 - p.0 * p.0.dot(&q.0);
    let wn = w.norm();
    if wn < 1e-300 {
        return Vec3::zeros();
    }
    w * (theta / wn)
}
