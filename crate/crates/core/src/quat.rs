//! Quaternion algebra and the quaternion form of SLERP.
//!
//! `SLERP(qa, qb, t) = qa (qa⁻¹ qb)^t`, with sphere points embedded as pure
//! quaternions `(0, p)`. This route shares no code with [`crate::geom::slerp`]
//! and serves as an independent check on it.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::geom::{geodesic_distance, UnitVector3, Vec3, SLERP_ANTIPODAL_GAP};

/// Imaginary parts below this norm are treated as zero by [`Quaternion::ln`].
pub const LOG_REAL_TOL: f64 = 1e-10;

/// `a + b i + c j + d k`, stored as scalar `a` and vector `u = (b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub u: Vec3,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        a: 1.0,
        u: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion {
            a,
            u: Vec3::new(b, c, d),
        }
    }

    pub fn pure(u: Vec3) -> Self {
        Quaternion { a: 0.0, u }
    }

    pub fn norm_squared(&self) -> f64 {
        self.a * self.a + self.u.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion {
            a: self.a * s,
            u: self.u * s,
        }
    }

    /// `(a, -u) / (a² + ‖u‖²)`.
    pub fn inverse(&self) -> Result<Self> {
        let n2 = self.norm_squared();
        if n2 == 0.0 {
            return Err(Error::ZeroQuaternion);
        }
        Ok(Quaternion {
            a: self.a / n2,
            u: -self.u / n2,
        })
    }

    /// `e^a (cos‖u‖, sin‖u‖ u/‖u‖)`.
    pub fn exp(&self) -> Self {
        let theta = self.u.norm();
        let sinc = if theta < 1e-8 {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        let ea = self.a.exp();
        Quaternion {
            a: ea * theta.cos(),
            u: self.u * (ea * sinc),
        }
    }

    /// Principal logarithm `(ln‖q‖, arccos(a/‖q‖) u/‖u‖)`.
    pub fn ln(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroQuaternion);
        }
        let un = self.u.norm();
        if un < LOG_REAL_TOL {
            if self.a > 0.0 {
                return Ok(Quaternion {
                    a: self.a.ln(),
                    u: Vec3::zeros(),
                });
            }
            if un == 0.0 {
                return Err(Error::LogBranchUndefined);
            }
        }
        // atan2(‖u‖, a) is arccos(a/‖q‖) without the cancellation near ±1.
        let angle = un.atan2(self.a);
        Ok(Quaternion {
            a: norm.ln(),
            u: self.u * (angle / un),
        })
    }

    /// `q^t = exp(t ln q)`.
    pub fn powf(&self, t: f64) -> Result<Self> {
        Ok(self.ln()?.scale(t).exp())
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product `(a₁a₂ - u₁·u₂, a₁u₂ + a₂u₁ + u₁×u₂)`.
    fn mul(self, rhs: Quaternion) -> Quaternion {
        Quaternion {
            a: self.a * rhs.a - self.u.dot(&rhs.u),
            u: rhs.u * self.a + self.u * rhs.a + self.u.cross(&rhs.u),
        }
    }
}

pub fn hamilton_product(q1: &Quaternion, q2: &Quaternion) -> Quaternion {
    *q1 * *q2
}

/// SLERP through quaternion powers, returning the imaginary part of
/// `(0, pa) ((0, pa)⁻¹ (0, pb))^t`.
pub fn quat_slerp(pa: &UnitVector3, pb: &UnitVector3, t: f64) -> Result<UnitVector3> {
    let angle = geodesic_distance(pa, pb);
    if angle > std::f64::consts::PI - SLERP_ANTIPODAL_GAP {
        return Err(Error::AntipodalPoints { angle });
    }
    let qa = Quaternion::pure(*pa.as_vec());
    let qb = Quaternion::pure(*pb.as_vec());
    let rel = qa.inverse()? * qb;
    let out = qa * rel.powf(t)?;
    Ok(UnitVector3::new_unchecked(out.u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::slerp;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn qclose(a: &Quaternion, b: &Quaternion, tol: f64) -> bool {
        (a.a - b.a).abs() <= tol && (a.u - b.u).amax() <= tol
    }

    const I: Quaternion = Quaternion {
        a: 0.0,
        u: Vec3::new(1.0, 0.0, 0.0),
    };
    const J: Quaternion = Quaternion {
        a: 0.0,
        u: Vec3::new(0.0, 1.0, 0.0),
    };

    #[test]
    fn product_examples() {
        let q = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        assert_eq!(Quaternion::IDENTITY * q, q);
        assert_eq!(I * I, Quaternion::new(-1.0, 0.0, 0.0, 0.0));
        assert_eq!(I * J, Quaternion::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(J * I, Quaternion::new(0.0, 0.0, 0.0, -1.0));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Quaternion::IDENTITY.inverse().unwrap(), Quaternion::IDENTITY);
        assert_eq!(I.inverse().unwrap(), Quaternion::new(0.0, -1.0, 0.0, 0.0));
        assert_eq!(Quaternion::new(2.0, 0.0, 0.0, 0.0).inverse().unwrap(), Quaternion::new(0.5, 0.0, 0.0, 0.0));
        assert_eq!(Quaternion::new(0.0, 0.0, 0.0, 0.0).inverse(), Err(Error::ZeroQuaternion));
    }

    #[test]
    fn exp_log_examples() {
        assert_eq!(Quaternion::new(0.0, 0.0, 0.0, 0.0).exp(), Quaternion::IDENTITY);
        let q = Quaternion::pure(Vec3::new(PI / 2.0, 0.0, 0.0)).exp();
        assert!(qclose(&q, &I, 1e-16));
        let q = Quaternion::new(0.6, 0.0, 0.8, 0.0);
        assert!(qclose(&q.powf(1.0).unwrap(), &q, 1e-15));
        assert!(qclose(&q.powf(0.0).unwrap(), &Quaternion::IDENTITY, 0.0));
        assert_eq!(Quaternion::new(-1.0, 0.0, 0.0, 0.0).ln(), Err(Error::LogBranchUndefined));
        assert_eq!(Quaternion::new(0.0, 0.0, 0.0, 0.0).ln(), Err(Error::ZeroQuaternion));
        let l = Quaternion::new(2.0, 1e-12, 0.0, 0.0).ln().unwrap();
        assert_abs_diff_eq!(l.a, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(l.u, Vec3::zeros());
    }

    #[test]
    fn quat_slerp_examples() {
        let pa = UnitVector3::E1;
        let pb = UnitVector3::E2;
        assert!((*quat_slerp(&pa, &pb, 0.0).unwrap().as_vec() - pa.as_vec()).amax() < 1e-15);
        assert!((*quat_slerp(&pa, &pb, 1.0).unwrap().as_vec() - pb.as_vec()).amax() < 1e-15);
        let m = quat_slerp(&pa, &pb, 0.5).unwrap();
        assert_abs_diff_eq!(m.x(), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.y(), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(matches!(quat_slerp(&pa, &-pa, 0.3), Err(Error::AntipodalPoints { .. })));
    }

    #[test]
    fn quat_slerp_scalar_part_vanishes() {
        let pa = UnitVector3::new(0.3, -0.2, 0.9).unwrap();
        let pb = UnitVector3::new(-0.5, 0.7, 0.1).unwrap();
        let qa = Quaternion::pure(*pa.as_vec());
        let rel = qa.inverse().unwrap() * Quaternion::pure(*pb.as_vec());
        for t in [0.1, 0.4, 0.77] {
            let out = qa * rel.powf(t).unwrap();
            assert!(out.a.abs() <= 1e-12);
        }
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
    }

    fn unit_quat_positive() -> impl Strategy<Value = Quaternion> {
        (0.05f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(_, b, c, d)| b * b + c * c + d * d > 1e-6)
            .prop_map(|(a, b, c, d)| {
                let q = Quaternion::new(a, b, c, d);
                q.scale(1.0 / q.norm())
            })
    }

    fn unit() -> impl Strategy<Value = UnitVector3> {
        (-1.0f64..1.0, -PI..PI).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            UnitVector3::new(r * phi.cos(), r * phi.sin(), z).unwrap()
        })
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(p in quat(), q in quat()) {
            prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() <= 1e-13 * (1.0 + p.norm() * q.norm()));
        }

        #[test]
        fn product_is_associative(p in quat(), q in quat(), r in quat()) {
            prop_assert!(qclose(&((p * q) * r), &(p * (q * r)), 1e-12));
        }

        #[test]
        fn inverse_is_two_sided(q in quat()) {
            prop_assume!(q.norm() > 1e-3);
            let inv = q.inverse().unwrap();
            prop_assert!(qclose(&(q * inv), &Quaternion::IDENTITY, 1e-13));
            prop_assert!(qclose(&(inv * q), &Quaternion::IDENTITY, 1e-13));
        }

        #[test]
        fn exp_inverts_ln(q in unit_quat_positive()) {
            prop_assume!(q.u.norm() > 1e-8);
            prop_assert!(qclose(&q.ln().unwrap().exp(), &q, 1e-12));
        }

        #[test]
        fn powers_add(q in unit_quat_positive(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let lhs = q.powf(s + t).unwrap();
            let rhs = q.powf(s).unwrap() * q.powf(t).unwrap();
            prop_assert!(qclose(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn parity_with_geodesic_slerp(pa in unit(), pb in unit(), k in 1usize..10) {
            let omega = geodesic_distance(&pa, &pb);
            prop_assume!(omega > 1e-6 && omega < PI - 1e-3);
            let t = k as f64 / 10.0;
            let a = quat_slerp(&pa, &pb, t).unwrap();
            let b = slerp(&pa, &pb, t).unwrap();
            prop_assert!((*a.as_vec() - b.as_vec()).amax() <= 1e-12);
        }
    }
}
