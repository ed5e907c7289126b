//! Long runs on `q' = Mq - (qᵀMq)q` with `M = diag(1/2, -1/2, -1/2)`, whose
//! attracting equilibria are `±e₁`.

use serde::Serialize;

use sphere_rk::geom::{exp_map, geodesic_distance};
use sphere_rk::integrators::{march_with, SlerpStepper};
use sphere_rk::problems::ProjectedLinearField;
use sphere_rk::{SchemeId, UnitVector3, Vec3};

use crate::Result;

/// Final distance below this counts as convergence.
pub const CONVERGED_DISTANCE: f64 = 1e-6;
/// Growth beyond this factor over the initial distance counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;
pub const DEFAULT_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Converged,
    Diverged,
    /// Neither threshold was reached within the run.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRun {
    pub scheme: String,
    pub h: f64,
    pub n_steps: usize,
    /// `min(d(qⁿ, e₁), d(qⁿ, -e₁))` for `n = 0..=n_steps`.
    pub distances: Vec<f64>,
    pub verdict: Verdict,
}

/// `exp_{e₁}(2·10⁻⁶ (0, 1, 1)/√2)`: close enough to `e₁` that the linearized
/// amplification factor alone decides the outcome within a few hundred steps.
pub fn default_q0() -> UnitVector3 {
    exp_map(&UnitVector3::E1, &(Vec3::new(0.0, 1.0, 1.0) * (2e-6 / 2f64.sqrt())))
}

fn attractor_distance(q: &UnitVector3) -> f64 {
    geodesic_distance(q, &UnitVector3::E1).min(geodesic_distance(q, &-UnitVector3::E1))
}

pub fn run_stability(scheme: SchemeId, h: f64, n_steps: usize, q0: UnitVector3) -> Result<StabilityRun> {
    let field = ProjectedLinearField::stability_model();
    let stepper = SlerpStepper::new(scheme, &field);
    let mut distances = Vec::with_capacity(n_steps + 1);
    march_with(&stepper, q0, 0.0, h * n_steps as f64, h, |_, _, q| distances.push(attractor_distance(q)))?;
    let d0 = distances[0];
    let verdict = if distances.iter().any(|&d| d > DIVERGENCE_FACTOR * d0) {
        Verdict::Diverged
    } else if *distances.last().expect("initial distance recorded") < CONVERGED_DISTANCE {
        Verdict::Converged
    } else {
        Verdict::Undecided
    };
    Ok(StabilityRun {
        scheme: scheme.name().to_string(),
        h,
        n_steps,
        distances,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_start_is_off_equilibrium() {
        let d = attractor_distance(&default_q0());
        assert!((d - 2e-6).abs() < 1e-15, "{d}");
    }

    #[test]
    fn records_every_step() {
        let run = run_stability(SchemeId::Sfe, 0.5, 40, default_q0()).unwrap();
        assert_eq!(run.distances.len(), 41);
        assert_eq!(run.verdict, Verdict::Converged);
    }

    #[test]
    fn small_step_far_start_is_undecided_then_converges() {
        let q0 = UnitVector3::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(run_stability(SchemeId::Stvdrk2, 0.1, 10, q0).unwrap().verdict, Verdict::Undecided);
        assert_eq!(run_stability(SchemeId::Stvdrk2, 0.5, 200, q0).unwrap().verdict, Verdict::Converged);
    }
}
