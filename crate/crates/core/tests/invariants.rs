use proptest::prelude::*;

use sphere_rk::baselines::{BaselineId, BaselineStepper};
use sphere_rk::eikonal::{coupled_step, hamiltonian, initial_rays, RayScheme, VelocityModel};
use sphere_rk::geom::{geodesic_distance, project};
use sphere_rk::integrators::{frechet_mean, march, SlerpStepper, WeightedPoints, FRECHET_MAX_ITER, FRECHET_TOL};
use sphere_rk::pharmonic::{pflow_evolve_with, pflow_rhs, DirectorCurve, FlowSign, PFlowParams};
use sphere_rk::problems::{ProjectedLinearField, RigidRotation, VortexField};
use sphere_rk::{SchemeId, UnitVector3, Vec3};

fn unit() -> impl Strategy<Value = UnitVector3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("away from the origin", |(x, y, z)| x * x + y * y + z * z > 0.01)
        .prop_map(|(x, y, z)| UnitVector3::new(x, y, z).unwrap())
}

fn scheme() -> impl Strategy<Value = SchemeId> {
    prop::sample::select(SchemeId::ALL.to_vec())
}

fn projected_baseline() -> impl Strategy<Value = BaselineId> {
    prop::sample::select(BaselineId::ALL.into_iter().filter(|b| b.is_projected()).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slerp_schemes_stay_on_the_sphere(id in scheme(), p0 in unit(), w in unit(), rate in 0.1f64..2.0, h in 0.01f64..0.3) {
        let field = RigidRotation::new(w.into_vec() * rate);
        let traj = march(&SlerpStepper::new(id, &field), p0, 0.0, 10.0 * h, h).unwrap();
        for p in &traj.states {
            prop_assert!((p.as_vec().norm() - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn projected_baselines_stay_on_the_sphere(id in projected_baseline(), p0 in unit(), h in 0.01f64..0.2) {
        let field = ProjectedLinearField::stability_model();
        let traj = march(&BaselineStepper::new(id, &field), p0.into_vec(), 0.0, 20.0 * h, h).unwrap();
        for x in &traj.states {
            prop_assert!((x.norm() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn rotation_preserves_distance_to_the_axis(id in scheme(), p0 in unit(), w in unit(), h in 0.01f64..0.2) {
        // ω·p is a first integral of f = ω × p.
        let field = RigidRotation::new(w.into_vec());
        let traj = march(&SlerpStepper::new(id, &field), p0, 0.0, 1.0, h).unwrap();
        let c0 = w.dot(&p0);
        let drift = traj.states.iter().map(|p| (w.dot(p) - c0).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 2.0 * h);
    }

    #[test]
    fn frechet_gradient_vanishes(c in unit(), offs in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3, -0.3f64..0.3, 0.05f64..1.0), 3..6)) {
        let total: f64 = offs.iter().map(|o| o.3).sum();
        let items: Vec<(f64, UnitVector3)> = offs
            .iter()
            .map(|&(a, b, d, w)| (w / total, project(&(c.into_vec() + Vec3::new(a, b, d))).unwrap()))
            .collect();
        let wp = WeightedPoints::new(items).unwrap();
        let m = frechet_mean(&wp, FRECHET_TOL, FRECHET_MAX_ITER).unwrap();
        prop_assert!(wp.gradient(&m).norm() <= 1e-12);
        for (_, p) in wp.items() {
            prop_assert!(geodesic_distance(&m, p) <= 1.0);
        }
    }

    #[test]
    fn pflow_rhs_is_tangent(pts in prop::collection::vec(unit(), 8..40), p in prop::sample::select(vec![1.0, 1.5, 2.0])) {
        for (v, q) in pflow_rhs(&pts, p, 1e-6, FlowSign::Descent).iter().zip(&pts) {
            prop_assert!(v.dot(q.as_vec()).abs() <= 1e-9 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn ray_phase_and_sphere(order in 1u32..=3, xs in unit(), h in 0.01f64..0.2) {
        let model = VelocityModel::ExpZ2;
        let scheme = RayScheme::of_order(order).unwrap();
        let mut ray = initial_rays(&model, &xs, 5)[2];
        for _ in 0..10 {
            ray = coupled_step(scheme, &model, &ray, h).unwrap();
        }
        prop_assert!((ray.u - 10.0 * h).abs() <= 1e-12);
        prop_assert!(ray.sphere_defect() <= 1e-13);
    }
}

#[test]
fn unit_speed_rays_keep_the_eikonal_constraint() {
    let model = VelocityModel::Constant(1.0);
    for scheme in [RayScheme::Sfe, RayScheme::Stvdrk2, RayScheme::Stvdrk3] {
        let err = |h: f64| {
            let mut ray = initial_rays(&model, &UnitVector3::E1, 7)[3];
            let n = (1.0 / h).round() as usize;
            let mut worst = 0.0f64;
            for _ in 0..n {
                ray = coupled_step(scheme, &model, &ray, h).unwrap();
                worst = worst.max(hamiltonian(&model, &ray.x, &ray.k).abs());
            }
            worst
        };
        let (a, b) = (err(0.02), err(0.01));
        assert!(a <= 1e-12 || a / b > 1.8, "{}: {a:e} -> {b:e}", scheme.name());
    }
}

#[test]
fn vortex_trajectories_agree_across_schemes() {
    let field = VortexField::four_vortex();
    let ends: Vec<UnitVector3> = [SchemeId::Stvdrk3, SchemeId::Stvdrk4, SchemeId::Ssprk104]
        .into_iter()
        .map(|id| *march(&SlerpStepper::new(id, &field), UnitVector3::E1, 0.0, 2.0, 0.005).unwrap().last())
        .collect();
    for e in &ends[1..] {
        assert!(geodesic_distance(e, &ends[0]) < 1e-6);
    }
}

#[test]
fn pflow_keeps_nodes_on_the_sphere() {
    let m: Vec<UnitVector3> = (0..48)
        .map(|j| {
            let s = j as f64 / 48.0 * std::f64::consts::TAU;
            UnitVector3::new(s.cos(), s.sin(), 0.3 * (3.0 * s).sin() + if j < 24 { 0.5 } else { -0.5 }).unwrap()
        })
        .collect();
    let curve = DirectorCurve::new(m).unwrap();
    for p in [1.0, 2.0] {
        let params = PFlowParams::new(p, 1e-5, 2e-3);
        let mut worst = 0.0f64;
        pflow_evolve_with(&curve, &params, 2, |_, _, c| worst = worst.max(c.max_norm_defect())).unwrap();
        assert!(worst <= 1e-12, "p = {p}: {worst:e}");
    }
}
