//! Ray tracing for the surface eikonal equation `‖∇u‖ = 1/v` on the sphere.
//!
//! Each ray carries a position `x`, a slowness vector `k` and the phase `u`,
//! evolved by
//!
//! ```text
//! x' = v² [k - (x·k) x/‖x‖]
//! k' = v² (x·k)/‖x‖ [k - (x·k)/‖x‖ x] - ∇v / v
//! u' = 1
//! ```
//!
//! Positions are stepped on the sphere (exp map and SLERP) while `k` follows
//! the matching Cartesian TVD Runge–Kutta stages.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{exp_map, geodesic_distance, project, slerp, UnitVector3, Vec3};
use crate::integrators::grid;

/// `-(1/8) √(21/π)`.
fn y31_scale() -> f64 {
    -(21.0 / PI).sqrt() / 8.0
}

/// Real spherical harmonic `Y₃¹(θ, φ) = -(1/8)√(21/π) cos φ sin θ (5cos²θ - 1)`,
/// with `θ` polar and `φ` azimuthal.
pub fn y31(theta: f64, phi: f64) -> f64 {
    let c = theta.cos();
    y31_scale() * phi.cos() * theta.sin() * (5.0 * c * c - 1.0)
}

/// Wave speed models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityModel {
    Constant(f64),
    /// `v = exp(-z²)`.
    ExpZ2,
    /// `v = 1 + Y₃¹`, extended off the sphere as a function of direction only.
    OnePlusY31,
}

impl VelocityModel {
    pub fn v(&self, x: &Vec3) -> f64 {
        match self {
            VelocityModel::Constant(c) => *c,
            VelocityModel::ExpZ2 => (-x.z * x.z).exp(),
            VelocityModel::OnePlusY31 => {
                let r = x.norm();
                let (xr, zr) = (x.x / r, x.z / r);
                1.0 + y31_scale() * xr * (5.0 * zr * zr - 1.0)
            }
        }
    }

    pub fn grad_v(&self, x: &Vec3) -> Vec3 {
        match self {
            VelocityModel::Constant(_) => Vec3::zeros(),
            VelocityModel::ExpZ2 => Vec3::new(0.0, 0.0, -2.0 * x.z * (-x.z * x.z).exp()),
            VelocityModel::OnePlusY31 => {
                // g = 5 x z² / r³ - x / r
                let r2 = x.norm_squared();
                let r = r2.sqrt();
                let r3 = r2 * r;
                let r5 = r3 * r2;
                let (a, z) = (x.x, x.z);
                let grad_xz2 = Vec3::new(z * z, 0.0, 2.0 * a * z) / r3 - x * (3.0 * a * z * z / r5);
                let grad_x = Vec3::x() / r - x * (a / r3);
                (grad_xz2 * 5.0 - grad_x) * y31_scale()
            }
        }
    }

    /// Minimum of `v` over a `n × 2n` (θ, φ) grid.
    pub fn grid_min(&self, n: usize) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..=n {
            let theta = PI * i as f64 / n as f64;
            for j in 0..2 * n {
                let phi = PI * j as f64 / n as f64;
                min = min.min(self.v(UnitVector3::from_spherical(theta, phi).as_vec()));
            }
        }
        min
    }
}

/// Position, slowness vector and phase of one ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    /// On the sphere for every scheme except [`RayScheme::Tvdrk3`].
    pub x: Vec3,
    pub k: Vec3,
    pub u: f64,
}

impl RayState {
    pub fn sphere_defect(&self) -> f64 {
        (self.x.norm() - 1.0).abs()
    }
}

/// `(f₁, f₂)` of the ray system; `u' = 1` is implicit.
pub fn ray_rhs(model: &VelocityModel, x: &Vec3, k: &Vec3) -> (Vec3, Vec3) {
    let v = model.v(x);
    let v2 = v * v;
    let r = x.norm();
    let xk = x.dot(k);
    let f1 = (k - x * (xk / r)) * v2;
    let f2 = (k - x * (xk / r)) * (v2 * xk / r) - model.grad_v(x) / v;
    (f1, f2)
}

/// `H = ½ {v² [‖k‖² - (k·n)²] - 1}`, zero along exact rays.
pub fn hamiltonian(model: &VelocityModel, x: &Vec3, k: &Vec3) -> f64 {
    let v = model.v(x);
    let kn = k.dot(x) / x.norm();
    0.5 * (v * v * (k.norm_squared() - kn * kn) - 1.0)
}

/// Time stepper for the coupled ray system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RayScheme {
    Sfe,
    Stvdrk2,
    Stvdrk3,
    /// TVDRK2 for `x` and `k`, `x` projected after the step.
    Ptvdrk2,
    /// TVDRK3 for `x` and `k`, `x` projected after the step.
    Ptvdrk3,
    /// TVDRK3 with no projection: positions leave the sphere.
    Tvdrk3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Geometry {
    Sphere,
    Projected,
    Free,
}

impl RayScheme {
    pub const ALL: [RayScheme; 6] = [
        RayScheme::Sfe,
        RayScheme::Stvdrk2,
        RayScheme::Stvdrk3,
        RayScheme::Ptvdrk2,
        RayScheme::Ptvdrk3,
        RayScheme::Tvdrk3,
    ];

    /// The sphere-intrinsic scheme of the given order.
    pub fn of_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(RayScheme::Sfe),
            2 => Ok(RayScheme::Stvdrk2),
            3 => Ok(RayScheme::Stvdrk3),
            _ => Err(Error::InvalidArgument(format!("ray order must be 1, 2 or 3, got {order}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RayScheme::Sfe => "sfe",
            RayScheme::Stvdrk2 => "stvdrk2",
            RayScheme::Stvdrk3 => "stvdrk3",
            RayScheme::Ptvdrk2 => "ptvdrk2",
            RayScheme::Ptvdrk3 => "ptvdrk3",
            RayScheme::Tvdrk3 => "tvdrk3",
        }
    }

    pub fn order(self) -> u32 {
        match self {
            RayScheme::Sfe => 1,
            RayScheme::Stvdrk2 | RayScheme::Ptvdrk2 => 2,
            _ => 3,
        }
    }

    fn geometry(self) -> Geometry {
        match self {
            RayScheme::Sfe | RayScheme::Stvdrk2 | RayScheme::Stvdrk3 => Geometry::Sphere,
            RayScheme::Ptvdrk2 | RayScheme::Ptvdrk3 => Geometry::Projected,
            RayScheme::Tvdrk3 => Geometry::Free,
        }
    }
}

struct Stage<'a> {
    model: &'a VelocityModel,
    geometry: Geometry,
    h: f64,
    limit: f64,
    count: usize,
}

impl Stage<'_> {
    /// Forward-Euler substep: exp map on the sphere, a straight line otherwise.
    fn euler(&mut self, x: &Vec3, k: &Vec3) -> Result<(Vec3, Vec3)> {
        self.count += 1;
        let (f1, f2) = ray_rhs(self.model, x, k);
        let k_next = k + f2 * self.h;
        let x_next = match self.geometry {
            Geometry::Sphere => {
                let length = self.h * f1.norm();
                if !(length < self.limit) {
                    return Err(Error::StepTooLarge {
                        stage: self.count,
                        length,
                        limit: self.limit,
                    });
                }
                exp_map(&UnitVector3::new_unchecked(*x), &(f1 * self.h)).into_vec()
            }
            Geometry::Projected | Geometry::Free => x + f1 * self.h,
        };
        Ok((x_next, k_next))
    }

    /// `(1 - t) a + t b`, by SLERP on the sphere.
    fn mix(&self, a: &Vec3, b: &Vec3, t: f64) -> Result<Vec3> {
        match self.geometry {
            Geometry::Sphere => Ok(slerp(&UnitVector3::new_unchecked(*a), &UnitVector3::new_unchecked(*b), t)?.into_vec()),
            Geometry::Projected | Geometry::Free => Ok(a * (1.0 - t) + b * t),
        }
    }

    fn finish(&self, x: Vec3) -> Result<Vec3> {
        match self.geometry {
            Geometry::Projected => Ok(project(&x)?.into_vec()),
            Geometry::Sphere | Geometry::Free => Ok(x),
        }
    }
}

/// Advances one ray by `h`. The phase is advanced by exactly `h`.
pub fn coupled_step(scheme: RayScheme, model: &VelocityModel, s: &RayState, h: f64) -> Result<RayState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let mut st = Stage {
        model,
        geometry: scheme.geometry(),
        h,
        limit: if scheme == RayScheme::Sfe { PI } else { FRAC_PI_2 },
        count: 0,
    };
    let (x, k) = (s.x, s.k);
    let (x_next, k_next) = match scheme.order() {
        1 => st.euler(&x, &k)?,
        2 => {
            let (q1, s1) = st.euler(&x, &k)?;
            let (q2, s2) = st.euler(&q1, &s1)?;
            (st.mix(&x, &q2, 0.5)?, (k + s2) * 0.5)
        }
        _ => {
            let (q1, s1) = st.euler(&x, &k)?;
            let (q2, s2) = st.euler(&q1, &s1)?;
            let q3 = st.mix(&x, &q2, 0.25)?;
            let s3 = k * 0.75 + s2 * 0.25;
            let (q4, s4) = st.euler(&q3, &s3)?;
            (st.mix(&x, &q4, 2.0 / 3.0)?, k / 3.0 + s4 * (2.0 / 3.0))
        }
    };
    Ok(RayState {
        x: st.finish(x_next)?,
        k: k_next,
        u: s.u + h,
    })
}

/// Rays sharing one phase value.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefront {
    pub t: f64,
    pub rays: Vec<RayState>,
}

/// Orthonormal tangent frame at `xs`; `(e₂, e₃)` at `xs = e₁`.
pub fn tangent_frame(xs: &UnitVector3) -> (Vec3, Vec3) {
    let reference = if xs.z().abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let b = (reference - xs.as_vec() * reference.dot(xs.as_vec())).normalize();
    let a = b.cross(xs.as_vec());
    (a, b)
}

/// Rays leaving `xs` in directions `2πj/n` with `‖k‖ = 1/v(xs)`, so `H = 0`.
pub fn initial_rays(model: &VelocityModel, xs: &UnitVector3, n_rays: usize) -> Vec<RayState> {
    let (a, b) = tangent_frame(xs);
    let speed = model.v(xs.as_vec());
    (0..n_rays)
        .map(|j| {
            let angle = 2.0 * PI * j as f64 / n_rays as f64;
            RayState {
                x: xs.into_vec(),
                k: (a * angle.cos() + b * angle.sin()) / speed,
                u: 0.0,
            }
        })
        .collect()
}

/// Ray tracing configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceParams {
    pub scheme: RayScheme,
    pub n_rays: usize,
    pub h: f64,
    /// Increasing times at which wavefronts are recorded; steps are shortened
    /// so that every snapshot time is hit exactly.
    pub snapshots: Vec<f64>,
}

/// Traces rays from `xs` and returns one wavefront per snapshot time.
pub fn trace_wavefront(model: &VelocityModel, xs: &UnitVector3, params: &TraceParams) -> Result<Vec<Wavefront>> {
    if params.n_rays < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 rays, got {}", params.n_rays)));
    }
    if params.snapshots.windows(2).any(|w| !(w[1] > w[0])) || params.snapshots.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("snapshot times must be nonnegative and increasing".into()));
    }
    let rays = initial_rays(model, xs, params.n_rays);
    let per_ray: Vec<Vec<RayState>> = rays
        .into_par_iter()
        .enumerate()
        .map(|(j, ray)| trace_one(model, ray, params).map_err(|e| Error::AtRay { ray: j, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    Ok(params
        .snapshots
        .iter()
        .enumerate()
        .map(|(i, &t)| Wavefront {
            t,
            rays: per_ray.iter().map(|r| r[i]).collect(),
        })
        .collect())
}

fn trace_one(model: &VelocityModel, mut ray: RayState, params: &TraceParams) -> Result<Vec<RayState>> {
    let mut out = Vec::with_capacity(params.snapshots.len());
    let mut t = 0.0;
    let mut step = 0;
    for &target in &params.snapshots {
        let steps = grid(t, target, params.h)?;
        for (ts, dt) in steps {
            ray = coupled_step(params.scheme, model, &ray, dt).map_err(|e| Error::AtStep {
                step,
                source: Box::new(e),
            })?;
            ray.u = ts + dt;
            step += 1;
        }
        ray.u = target;
        t = target;
        out.push(ray);
    }
    Ok(out)
}

/// `[∮ (t - d(x, xs))² ds]^{1/2}` over the closed polyline through the ray
/// positions, trapezoidal rule with geodesic segment lengths.
pub fn wavefront_e2(front: &Wavefront, xs: &UnitVector3, t: f64) -> Result<f64> {
    let pts: Vec<UnitVector3> = front.rays.iter().map(|r| project(&r.x)).collect::<Result<_>>()?;
    let n = pts.len();
    let g: Vec<f64> = pts.iter().map(|p| t - geodesic_distance(p, xs)).collect();
    let mut length = 0.0;
    let mut sum = 0.0;
    for j in 0..n {
        let jn = (j + 1) % n;
        let d = geodesic_distance(&pts[j], &pts[jn]);
        length += d;
        sum += 0.5 * d * (g[j] * g[j] + g[jn] * g[jn]);
    }
    if length < 1e-12 {
        return Err(Error::DegenerateFront { length });
    }
    Ok(sum.sqrt())
}

#[derive(Serialize)]
struct Row {
    t: f64,
    ray_index: usize,
    x: f64,
    y: f64,
    z: f64,
    kx: f64,
    ky: f64,
    kz: f64,
    u: f64,
}

/// Writes snapshots with columns `t, ray_index, x, y, z, kx, ky, kz, u`.
pub fn write_wavefronts_csv<W: Write>(out: W, fronts: &[Wavefront]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for front in fronts {
        for (j, r) in front.rays.iter().enumerate() {
            w.serialize(Row {
                t: front.t,
                ray_index: j,
                x: r.x.x,
                y: r.x.y,
                z: r.x.z,
                kx: r.k.x,
                ky: r.k.y,
                kz: r.k.z,
                u: r.u,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhs_for_unit_speed() {
        let model = VelocityModel::Constant(1.0);
        let x = Vec3::x();
        let k = Vec3::new(0.0, 0.6, 0.8);
        let (f1, f2) = ray_rhs(&model, &x, &k);
        assert_eq!(f1, k);
        assert_eq!(f2, Vec3::zeros());
        assert_eq!(hamiltonian(&model, &x, &k), 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-6;
        for model in [VelocityModel::ExpZ2, VelocityModel::OnePlusY31] {
            for x in [Vec3::new(0.3, -0.5, 0.81), Vec3::new(-0.7, 0.1, -0.7), Vec3::new(0.0, 0.6, 0.8)] {
                let g = model.grad_v(&x);
                for i in 0..3 {
                    let mut d = Vec3::zeros();
                    d[i] = eps;
                    let fd = (model.v(&(x + d)) - model.v(&(x - d))) / (2.0 * eps);
                    assert_abs_diff_eq!(g[i], fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn y31_examples() {
        assert_eq!(y31(0.0, 1.3), 0.0);
        assert_abs_diff_eq!(y31(0.7, FRAC_PI_2), 0.0, epsilon = 1e-16);
        let p = UnitVector3::from_spherical(1.1, 0.4);
        assert_abs_diff_eq!(VelocityModel::OnePlusY31.v(p.as_vec()), 1.0 + y31(1.1, 0.4), epsilon = 1e-15);
        assert!(VelocityModel::OnePlusY31.grid_min(400) > 0.5);
    }

    #[test]
    fn phase_advances_exactly() {
        let model = VelocityModel::Constant(1.0);
        let params = TraceParams {
            scheme: RayScheme::Stvdrk3,
            n_rays: 8,
            h: 0.1,
            snapshots: vec![0.35, 1.0],
        };
        let fronts = trace_wavefront(&model, &UnitVector3::E1, &params).unwrap();
        assert_eq!(fronts[0].rays[3].u, 0.35);
        assert_eq!(fronts[1].rays[3].u, 1.0);
        let mut s = initial_rays(&model, &UnitVector3::E1, 4)[1];
        for _ in 0..7 {
            s = coupled_step(RayScheme::Stvdrk2, &model, &s, 0.125).unwrap();
        }
        assert_eq!(s.u, 0.875);
    }

    #[test]
    fn unit_speed_front_is_a_circle() {
        let model = VelocityModel::Constant(1.0);
        let xs = UnitVector3::E1;
        let params = TraceParams {
            scheme: RayScheme::Stvdrk3,
            n_rays: 64,
            h: FRAC_PI_2 / 64.0,
            snapshots: vec![FRAC_PI_2],
        };
        let front = &trace_wavefront(&model, &xs, &params).unwrap()[0];
        for r in &front.rays {
            assert!(r.sphere_defect() <= 1e-12);
            let d = geodesic_distance(&project(&r.x).unwrap(), &xs);
            assert!((d - FRAC_PI_2).abs() < 1e-5);
        }
        assert!(wavefront_e2(front, &xs, FRAC_PI_2).unwrap() < 1e-4);
    }

    #[test]
    fn e2_of_uniform_offset() {
        let xs = UnitVector3::E1;
        let eps = 1e-3;
        let n = 2000;
        let rays = (0..n)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / n as f64;
                let x = UnitVector3::from_spherical(FRAC_PI_2 + eps, phi);
                // Rotate the z-pole circle so it is centred on e1.
                RayState {
                    x: Vec3::new(x.z(), x.x(), x.y()),
                    k: Vec3::zeros(),
                    u: 0.0,
                }
            })
            .collect();
        let front = Wavefront { t: FRAC_PI_2, rays };
        let e2 = wavefront_e2(&front, &xs, FRAC_PI_2).unwrap();
        let circumference = 2.0 * PI * (FRAC_PI_2 + eps).sin();
        assert_abs_diff_eq!(e2, eps * circumference.sqrt(), epsilon = 1e-8);
        let degenerate = Wavefront {
            t: 0.0,
            rays: vec![RayState { x: Vec3::x(), k: Vec3::zeros(), u: 0.0 }; 4],
        };
        assert!(matches!(wavefront_e2(&degenerate, &xs, 0.0), Err(Error::DegenerateFront { .. })));
    }

    #[test]
    fn tvdrk3_leaves_the_sphere_while_stvdrk3_does_not() {
        let model = VelocityModel::ExpZ2;
        let dt = PI / 5.0;
        let snapshots: Vec<f64> = [1.0, 3.0, 5.0].iter().map(|k| k * dt).collect();
        let run = |scheme| {
            let params = TraceParams {
                scheme,
                n_rays: 32,
                h: dt,
                snapshots: snapshots.clone(),
            };
            trace_wavefront(&model, &UnitVector3::E1, &params)
                .unwrap()
                .iter()
                .flat_map(|f| f.rays.iter().map(|r| r.sphere_defect()))
                .fold(0.0, f64::max)
        };
        assert!(run(RayScheme::Stvdrk3) <= 1e-12);
        assert!(run(RayScheme::Tvdrk3) > 1e-3);
    }

    #[test]
    fn csv_layout() {
        let front = Wavefront {
            t: 0.5,
            rays: vec![RayState { x: Vec3::x(), k: Vec3::y(), u: 0.5 }],
        };
        let mut buf = Vec::new();
        write_wavefronts_csv(&mut buf, &[front]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,ray_index,x,y,z,kx,ky,kz,u");
        assert_eq!(text.lines().nth(1).unwrap(), "0.5,0,1.0,0.0,0.0,0.0,1.0,0.0,0.5");
    }
}
