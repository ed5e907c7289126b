//! Endpoint-error tables and least-squares order fits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use sphere_rk::integrators::{integrate, SchemeId};
use sphere_rk::problems::{RigidRotation, VortexConfig, VortexField};
use sphere_rk::{UnitVector3, Vec3, VelocityField};

use crate::method::Method;
use crate::{HarnessError, Result};

/// Rows with error below this are at the rounding floor and are not fitted.
pub const FIT_FLOOR: f64 = 1e-14;
/// Rows with error above this (relative to the unit solution scale) are pre-asymptotic.
pub const FIT_CEILING: f64 = 0.1;
pub const MIN_FIT_ROWS: usize = 3;

/// Reference step as a fraction of the smallest tested step.
pub const REFERENCE_REFINEMENT: f64 = 100.0;

/// Test problems with `p₀ = (1, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Vortex4,
    /// `p' = ω × p` with `ω = (0.6, 0, 0.8)`: a small-circle orbit with a closed form.
    Rotation,
}

impl Problem {
    pub const ROTATION_OMEGA: [f64; 3] = [0.6, 0.0, 0.8];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Vortex4 => "vortex4",
            Problem::Rotation => "rotation",
        }
    }

    pub fn p0(self) -> UnitVector3 {
        match self {
            Problem::Vortex4 => VortexConfig::default().p0,
            Problem::Rotation => UnitVector3::E1,
        }
    }

    pub fn field(self) -> Box<dyn VelocityField> {
        match self {
            Problem::Vortex4 => Box::new(VortexField::four_vortex()),
            Problem::Rotation => Box::new(self.rotation()),
        }
    }

    fn rotation(self) -> RigidRotation {
        let [x, y, z] = Self::ROTATION_OMEGA;
        RigidRotation::new(Vec3::new(x, y, z))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "vortex4" => Ok(Problem::Vortex4),
            "rotation" => Ok(Problem::Rotation),
            _ => Err(format!("unknown problem '{s}' (expected vortex4 or rotation)")),
        }
    }
}

/// The endpoint errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub endpoint: Vec3,
    /// Step of the fine STVDRK3 run; `None` for a closed form.
    pub h_ref: Option<f64>,
}

impl Reference {
    /// Closed form for [`Problem::Rotation`]; STVDRK3 with step `h_ref` otherwise.
    pub fn compute(problem: Problem, t_final: f64, h_ref: f64) -> Result<Self> {
        match problem {
            Problem::Rotation => Ok(Reference {
                endpoint: problem.rotation().exact(&problem.p0(), t_final).into_vec(),
                h_ref: None,
            }),
            Problem::Vortex4 => {
                let field = problem.field();
                let traj = integrate(SchemeId::Stvdrk3, field.as_ref(), problem.p0(), 0.0, t_final, h_ref)
                    .map_err(HarnessError::ReferenceUnavailable)?;
                Ok(Reference {
                    endpoint: traj.last().into_vec(),
                    h_ref: Some(h_ref),
                })
            }
        }
    }

    /// Reference for a step list: `h_ref = min(h) / 100`.
    pub fn for_steps(problem: Problem, t_final: f64, h_list: &[f64]) -> Result<Self> {
        let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
        Self::compute(problem, t_final, h_min / REFERENCE_REFINEMENT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub e2: f64,
    pub enorm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: String,
    /// Sorted by `h` descending.
    pub rows: Vec<ConvergenceRow>,
    /// `None` when fewer than three rows survive the floor/ceiling filter.
    pub order_e2: Option<f64>,
    pub order_enorm: Option<f64>,
}

impl ConvergenceReport {
    fn from_rows(method: &Method, mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let pairs = |g: fn(&ConvergenceRow) -> f64| rows.iter().map(|r| (r.h, g(r))).collect::<Vec<_>>();
        let order_e2 = fit_order(&pairs(|r| r.e2)).ok();
        let order_enorm = fit_order(&pairs(|r| r.enorm)).ok();
        ConvergenceReport {
            method: method.name(),
            rows,
            order_e2,
            order_enorm,
        }
    }

    pub fn max_enorm(&self) -> f64 {
        self.rows.iter().map(|r| r.enorm).fold(0.0, f64::max)
    }
}

fn measure(method: &Method, problem: Problem, h: f64, t_final: f64, reference: &Reference) -> Result<ConvergenceRow> {
    let field = problem.field();
    let end = method.endpoint(field.as_ref(), problem.p0(), 0.0, t_final, h)?;
    Ok(ConvergenceRow {
        h,
        e2: (end - reference.endpoint).norm(),
        enorm: (end.norm() - 1.0).abs(),
    })
}

/// Errors of one method over `h_list` against `reference`.
pub fn run_convergence_against(
    method: &Method,
    problem: Problem,
    h_list: &[f64],
    t_final: f64,
    reference: &Reference,
) -> Result<ConvergenceReport> {
    let rows = h_list
        .par_iter()
        .map(|&h| measure(method, problem, h, t_final, reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_rows(method, rows))
}

/// Errors of one method over `h_list`, with its own reference run.
pub fn run_convergence(method: &Method, problem: Problem, h_list: &[f64], t_final: f64) -> Result<ConvergenceReport> {
    let reference = Reference::for_steps(problem, t_final, h_list)?;
    run_convergence_against(method, problem, h_list, t_final, &reference)
}

/// Reports for several methods sharing one reference, in input order.
pub fn run_convergence_many(
    methods: &[Method],
    problem: Problem,
    h_list: &[f64],
    t_final: f64,
) -> Result<Vec<ConvergenceReport>> {
    let reference = Reference::for_steps(problem, t_final, h_list)?;
    methods
        .par_iter()
        .map(|m| run_convergence_against(m, problem, h_list, t_final, &reference))
        .collect()
}

/// Least-squares slope of `log err` against `log h`.
///
/// Rows below [`FIT_FLOOR`] or above [`FIT_CEILING`] are dropped first.
pub fn fit_order(rows: &[(f64, f64)]) -> Result<f64> {
    let kept: Vec<(f64, f64)> = rows
        .iter()
        .copied()
        .filter(|&(_, e)| !((0.0..FIT_FLOOR).contains(&e) || e > FIT_CEILING))
        .collect();
    if let Some(&(h, err)) = kept.iter().find(|&&(h, e)| !(e > 0.0) || !(h > 0.0)) {
        return Err(HarnessError::NonPositiveError { h, err });
    }
    if kept.len() < MIN_FIT_ROWS {
        return Err(HarnessError::TooFewPoints {
            needed: MIN_FIT_ROWS,
            got: kept.len(),
        });
    }
    let n = kept.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `h₀/2^a..b` (inclusive) or a comma-separated list of steps.
pub fn parse_h_list(s: &str) -> Result<Vec<f64>> {
    let bad = || HarnessError::BadStepList(s.to_string());
    let s = s.trim();
    let list = if let Some((base, range)) = s.split_once("/2^") {
        let base: f64 = base.trim().parse().map_err(|_| bad())?;
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        (lo..=hi).map(|k| base * 2f64.powi(-k)).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    };
    if list.is_empty() || list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(bad());
    }
    Ok(list)
}

/// Default step list `0.1·2⁻ᵏ`, `k = 0..5`.
pub fn default_h_list() -> Vec<f64> {
    (0..=5).map(|k| 0.1 * 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fit_recovers_exact_power_laws() {
        let hs = default_h_list();
        let sq: Vec<_> = hs.iter().map(|&h| (h, h * h)).collect();
        assert_abs_diff_eq!(fit_order(&sq).unwrap(), 2.0, epsilon = 1e-12);
        let cubic: Vec<_> = hs.iter().map(|&h| (h, 7.5e-3 * h.powi(3))).collect();
        assert_abs_diff_eq!(fit_order(&cubic).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_drops_floor_and_ceiling_rows() {
        let mut rows: Vec<_> = default_h_list().iter().map(|&h| (h, h * h)).collect();
        rows.push((1e-9, 1e-16));
        rows.push((1e-9, 0.0));
        rows.insert(0, (10.0, 5.0));
        assert_abs_diff_eq!(fit_order(&rows).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_order(&[(0.1, 1e-3), (0.05, -1e-4), (0.025, 1e-5)]),
            Err(HarnessError::NonPositiveError { .. })
        ));
        assert!(matches!(
            fit_order(&[(0.1, 1e-3), (0.05, 1e-4), (0.025, 1e-16)]),
            Err(HarnessError::TooFewPoints { got: 2, .. })
        ));
    }

    #[test]
    fn step_list_syntax() {
        assert_eq!(parse_h_list("0.1/2^0..5").unwrap(), default_h_list());
        assert_eq!(parse_h_list("0.2, 0.1").unwrap(), vec![0.2, 0.1]);
        for bad in ["", "0.1/2^3..1", "0.1/2^a..3", "0.1,-0.2", "abc"] {
            assert!(parse_h_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rows_are_sorted_descending() {
        let r = run_convergence(&Method::slerp(SchemeId::Stvdrk2), Problem::Rotation, &[0.025, 0.1, 0.05], 1.0).unwrap();
        let hs: Vec<f64> = r.rows.iter().map(|r| r.h).collect();
        assert_eq!(hs, vec![0.1, 0.05, 0.025]);
    }
}
