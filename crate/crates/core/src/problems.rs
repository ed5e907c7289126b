//! Model problems: the four-vortex flow, rigid rotation, and the projected
//! linear system used for the step-size stability analysis.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::geom::{TangentVector, UnitVector3, Vec3};

/// `1 - xᵢ·p` below this is reported as [`Error::NearPole`].
pub const POLE_GAP: f64 = 1e-12;

/// Point-vortex configuration on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexConfig {
    pub centers: Vec<UnitVector3>,
    pub p0: UnitVector3,
    pub t_final: f64,
}

impl Default for VortexConfig {
    /// Four vortices at (1,-1,1)/√3, (1,-1,-1)/√3, (-2,1,0)/√5, (-1,-1,0)/√2;
    /// start at (1,0,0) and integrate to T = 2.
    fn default() -> Self {
        let c = |x: f64, y: f64, z: f64| UnitVector3::new(x, y, z).expect("nonzero center");
        VortexConfig {
            centers: vec![
                c(1.0, -1.0, 1.0),
                c(1.0, -1.0, -1.0),
                c(-2.0, 1.0, 0.0),
                c(-1.0, -1.0, 0.0),
            ],
            p0: UnitVector3::E1,
            t_final: 2.0,
        }
    }
}

/// `f(x) = Σᵢ (xᵢ × x) / (2 (1 - xᵢ·x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexField {
    centers: Vec<UnitVector3>,
}

impl VortexField {
    pub fn new(centers: Vec<UnitVector3>) -> Self {
        VortexField { centers }
    }

    pub fn four_vortex() -> Self {
        Self::new(VortexConfig::default().centers)
    }

    pub fn centers(&self) -> &[UnitVector3] {
        &self.centers
    }
}

impl VelocityField for VortexField {
    fn eval(&self, p: &UnitVector3, _t: f64) -> Result<TangentVector> {
        let x = p.as_vec();
        let mut sum = Vec3::zeros();
        for (i, c) in self.centers.iter().enumerate() {
            let gap = 1.0 - c.as_vec().dot(x);
            if gap < POLE_GAP {
                return Err(Error::NearPole { center: i, gap });
            }
            sum += c.as_vec().cross(x) / (2.0 * gap);
        }
        Ok(TangentVector::new(*p, sum))
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

/// The four-vortex field evaluated at `p`.
pub fn vortex4_field(p: &UnitVector3) -> Result<TangentVector> {
    VortexField::four_vortex().eval(p, 0.0)
}

/// `f(p) = ω × p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation {
    pub omega: Vec3,
}

impl RigidRotation {
    pub fn new(omega: Vec3) -> Self {
        RigidRotation { omega }
    }

    /// `p0` rotated by angle `‖ω‖ t` about `ω̂` (Rodrigues).
    pub fn exact(&self, p0: &UnitVector3, t: f64) -> UnitVector3 {
        let w = self.omega.norm();
        if w == 0.0 {
            return *p0;
        }
        let k = self.omega / w;
        let v = p0.as_vec();
        let (s, c) = (w * t).sin_cos();
        let r = v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
        UnitVector3::new_unchecked(r)
    }
}

impl VelocityField for RigidRotation {
    fn eval(&self, p: &UnitVector3, _t: f64) -> Result<TangentVector> {
        Ok(TangentVector::new(*p, self.omega.cross(p.as_vec())))
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

pub fn rigid_rotation_field(omega: Vec3) -> RigidRotation {
    RigidRotation::new(omega)
}

/// `g(q) = (I - q qᵀ) M q`, the linear flow `p' = Mp` viewed through radial projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedLinearField {
    pub m: Matrix3<f64>,
}

impl ProjectedLinearField {
    pub fn new(m: Matrix3<f64>) -> Self {
        ProjectedLinearField { m }
    }

    /// `diag(1/2, -1/2, -1/2)`: ±e₁ are attractors with tangent eigenvalues -1.
    pub fn stability_model() -> Self {
        Self::new(Matrix3::from_diagonal(&Vec3::new(0.5, -0.5, -0.5)))
    }

    /// `g` on all of R³ (no normalization of `q`).
    pub fn g(&self, q: &Vec3) -> Vec3 {
        let mq = self.m * q;
        mq - q * q.dot(&mq)
    }

    /// `Dg(q) = M - (qᵀMq) I - 2 q qᵀ M`.
    pub fn jacobian(&self, q: &Vec3) -> Matrix3<f64> {
        let qmq = q.dot(&(self.m * q));
        self.m - Matrix3::identity() * qmq - (q * q.transpose() * self.m) * 2.0
    }
}

impl VelocityField for ProjectedLinearField {
    fn eval(&self, p: &UnitVector3, _t: f64) -> Result<TangentVector> {
        Ok(TangentVector::new(*p, self.g(p.as_vec())))
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

pub fn projected_linear_field(m: Matrix3<f64>) -> ProjectedLinearField {
    ProjectedLinearField::new(m)
}

/// Eigenvalue gaps `σᵢⱼ = λⱼ - λᵢ` of a diagonal `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTable {
    /// `table[i][j] = λⱼ - λᵢ` for `i ≠ j`; `None` on the diagonal.
    pub table: [[Option<f64>; 3]; 3],
    /// Minimum over all `i ≠ j`.
    pub sigma: f64,
}

impl SigmaTable {
    /// The two gaps governing stability at equilibrium `eᵢ`.
    pub fn at_equilibrium(&self, i: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        let mut n = 0;
        for j in 0..3 {
            if let Some(s) = self.table[i][j] {
                out[n] = s;
                n += 1;
            }
        }
        out
    }

    /// Whether `eᵢ` is an attractor (both gaps negative).
    pub fn is_stable(&self, i: usize) -> bool {
        self.at_equilibrium(i).iter().all(|&s| s < 0.0)
    }
}

/// σ table for the diagonal of `m`; off-diagonal entries are ignored.
pub fn stability_sigma(m: &Matrix3<f64>) -> SigmaTable {
    let lambda = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let mut table = [[None; 3]; 3];
    let mut sigma = f64::INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let s = lambda[j] - lambda[i];
                table[i][j] = Some(s);
                sigma = sigma.min(s);
            }
        }
    }
    SigmaTable { table, sigma }
}

/// `μ³/6 + μ²/2 + μ + 2`; its real root bounds the RK3 stability interval.
pub fn rk3_boundary_cubic(mu: f64) -> f64 {
    mu * mu * mu / 6.0 + mu * mu / 2.0 + mu + 2.0
}

/// Lower end μ* of the real stability interval `μ* ≤ σh ≤ 0`.
///
/// Orders 1 and 2 give -2; order 3 gives the real root of
/// [`rk3_boundary_cubic`], found by bisection on [-3, -2].
pub fn stability_interval(order: u32) -> Result<f64> {
    match order {
        1 | 2 => Ok(-2.0),
        3 => {
            let (mut lo, mut hi) = (-3.0f64, -2.0f64);
            debug_assert!(rk3_boundary_cubic(lo) < 0.0 && rk3_boundary_cubic(hi) > 0.0);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if rk3_boundary_cubic(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(if rk3_boundary_cubic(lo).abs() < rk3_boundary_cubic(hi).abs() {
                lo
            } else {
                hi
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "stability interval is tabulated for orders 1-3, got {order}"
        ))),
    }
}
