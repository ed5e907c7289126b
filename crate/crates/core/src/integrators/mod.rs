//! Sphere-intrinsic Runge–Kutta steppers.
//!
//! Forward-Euler substeps become exponential-map steps and convex
//! combinations become SLERPs, so every stage stays on the sphere.

mod frechet;
mod scheme;
mod tableau;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

pub use frechet::{
    frechet_mean, progressive_slerp_combine, WeightedPoints, FRECHET_MAX_ITER, FRECHET_TOL, WEIGHT_SUM_TOL,
};
pub use scheme::{fold_weights, CombineMode, Op, SlerpScheme};
pub use tableau::{SspTableau, CONSISTENCY_TOL};

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::geom::{slerp, UnitVector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Sfe,
    Stvdrk2,
    Stvdrk3,
    Stvdrk4,
    Ssprk54,
    Ssprk104,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::Sfe,
        SchemeId::Stvdrk2,
        SchemeId::Stvdrk3,
        SchemeId::Stvdrk4,
        SchemeId::Ssprk54,
        SchemeId::Ssprk104,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Sfe => "sfe",
            SchemeId::Stvdrk2 => "stvdrk2",
            SchemeId::Stvdrk3 => "stvdrk3",
            SchemeId::Stvdrk4 => "stvdrk4",
            SchemeId::Ssprk54 => "ssprk54",
            SchemeId::Ssprk104 => "ssprk104",
        }
    }

    /// Formal order of the underlying Euclidean method.
    pub fn nominal_order(self) -> u32 {
        match self {
            SchemeId::Sfe => 1,
            SchemeId::Stvdrk2 => 2,
            SchemeId::Stvdrk3 => 3,
            _ => 4,
        }
    }

    pub fn scheme(self) -> &'static SlerpScheme {
        static CELLS: [OnceLock<SlerpScheme>; 6] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        CELLS[self as usize].get_or_init(|| build(self))
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

fn exp(from: usize, coef: f64) -> Op {
    Op::Exp { from, coef }
}

fn fold(terms: &[usize], fold: &[f64]) -> Op {
    Op::Combine {
        terms: terms.to_vec(),
        fold: fold.to_vec(),
        weights: fold_weights(fold),
    }
}

/// Weights printed for the Fréchet-mean form of the STVDRK4 `q₃` combination.
pub const STVDRK4_Q3_WEIGHTS: [f64; 3] = [0.0215956, 0.24031065, 0.73809375];

fn build(id: SchemeId) -> SlerpScheme {
    let ops = match id {
        SchemeId::Sfe => vec![exp(0, 1.0)],
        // 1: q1, 2: q2, 3: p
        SchemeId::Stvdrk2 => vec![exp(0, 1.0), exp(1, 1.0), fold(&[0, 2], &[0.5])],
        // 1: q1, 2: q2, 3: q3, 4: q4, 5: p
        SchemeId::Stvdrk3 => vec![
            exp(0, 1.0),
            exp(1, 1.0),
            fold(&[0, 2], &[0.25]),
            exp(3, 1.0),
            fold(&[0, 4], &[2.0 / 3.0]),
        ],
        SchemeId::Stvdrk4 => vec![
            exp(0, 0.500000000000000),  // 1: q1
            exp(0, -1.065687335761845), // 2: q20
            exp(1, 1.068486941019387),  // 3: q21
            fold(&[2, 3], &[0.594375000000000]), // 4: q2
            exp(0, -0.947054029524533), // 5: q30
            exp(1, -1.065495848810696), // 6: q31
            exp(4, 1.066666666666667),  // 7: q32
            Op::Combine {
                // 8: q3
                terms: vec![5, 6, 7],
                fold: vec![0.917544541224197, 0.738093750000000],
                weights: STVDRK4_Q3_WEIGHTS.to_vec(),
            },
            exp(0, 0.500000000000000), // 9: q40
            exp(1, 0.816060062020566), // 10: q41
            exp(8, 0.500000000000000), // 11: q43
            fold(
                &[9, 10, 4, 11],
                &[0.505236249690773, 0.393650000000000, 0.333333333333333],
            ), // 12: p
        ],
        SchemeId::Ssprk54 => vec![
            exp(0, 0.39175222700392),                  // 1: q1
            exp(1, 0.663050807590193),                 // 2: q21
            fold(&[0, 2], &[0.55562950593266]),        // 3: q2
            exp(3, 0.663050807607172),                 // 4: q32
            fold(&[0, 4], &[0.37989814861460]),        // 5: q3
            exp(5, 0.663050807601060),                 // 6: q43
            fold(&[0, 6], &[0.82192004589227]),        // 7: q4
            exp(5, 0.663050807634935),                 // 8: q53
            exp(7, 0.648818932180072),                 // 9: q54
            fold(
                &[0, 3, 8, 9],
                &[0.986961045402787, 0.195804064212316, 0.348336757736944],
            ), // 10: p
        ],
        SchemeId::Ssprk104 => {
            let mut ops = Vec::new();
            // Slots 1..=4 are q2..q5.
            for i in 0..4 {
                ops.push(exp(i, 1.0 / 6.0));
            }
            ops.push(exp(4, 1.0 / 6.0)); // 5: q65
            ops.push(fold(&[0, 5], &[0.4])); // 6: q6
            for i in 6..10 {
                ops.push(exp(i, 1.0 / 6.0)); // 7..=10: q7..q10
            }
            ops.push(exp(10, 1.0 / 6.0)); // 11: q10,10
            ops.push(fold(&[0, 5, 11], &[0.9, 0.6])); // 12: p
            ops
        }
    };
    let limit = if id == SchemeId::Sfe { PI } else { FRAC_PI_2 };
    SlerpScheme::new(ops, limit).expect("built-in schemes are well formed")
}

/// One step of a SLERP scheme for a single point.
pub fn slerp_step<F: VelocityField + ?Sized>(
    scheme: &SlerpScheme,
    f: &F,
    p: &UnitVector3,
    t: f64,
    h: f64,
    mode: CombineMode,
) -> Result<UnitVector3> {
    let mut rhs = |pts: &[UnitVector3], tt: f64| -> Result<Vec<_>> {
        pts.iter().map(|q| f.eval(q, tt).map(|v| *v.vector())).collect()
    };
    let out = scheme.step_batch(&mut rhs, std::slice::from_ref(p), t, h, mode)?;
    Ok(out[0])
}

/// `exp_p(h f(p, t))`.
pub fn sfe_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Sfe.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

pub fn stvdrk2_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Stvdrk2.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

pub fn stvdrk3_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Stvdrk3.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

pub fn stvdrk4_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Stvdrk4.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

pub fn ssprk54_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Ssprk54.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

pub fn ssprk104_step<F: VelocityField + ?Sized>(f: &F, p: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    slerp_step(SchemeId::Ssprk104.scheme(), f, p, t, h, CombineMode::ProgressiveSlerp)
}

/// The two fold orders for STVDRK4's `q₃`: the forward fold used by the
/// scheme and the reversed one `SLERP(SLERP(q32, q31, ·), q30, ·)`.
pub fn stvdrk4_q3_fold_orders(
    q30: &UnitVector3,
    q31: &UnitVector3,
    q32: &UnitVector3,
) -> Result<(UnitVector3, UnitVector3)> {
    let forward = slerp(&slerp(q30, q31, 0.917544541224197)?, q32, 0.738093750000000)?;
    let reversed = slerp(&slerp(q32, q31, 0.245614850055866)?, q30, 0.021595600000000)?;
    Ok((forward, reversed))
}

/// A single-step map on some state space, advanced on a uniform grid by [`march`].
pub trait OneStep {
    type State: Clone;

    fn step(&self, x: &Self::State, t: f64, h: f64) -> Result<Self::State>;
}

/// A SLERP scheme bound to a velocity field.
pub struct SlerpStepper<'a, F: ?Sized> {
    pub scheme: &'a SlerpScheme,
    pub field: &'a F,
    pub mode: CombineMode,
}

impl<'a, F: VelocityField + ?Sized> SlerpStepper<'a, F> {
    pub fn new(id: SchemeId, field: &'a F) -> Self {
        SlerpStepper {
            scheme: id.scheme(),
            field,
            mode: CombineMode::ProgressiveSlerp,
        }
    }

    pub fn with_mode(mut self, mode: CombineMode) -> Self {
        self.mode = mode;
        self
    }
}

impl<F: VelocityField + ?Sized> OneStep for SlerpStepper<'_, F> {
    type State = UnitVector3;

    fn step(&self, x: &UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
        slerp_step(self.scheme, self.field, x, t, h, self.mode)
    }
}

/// Relative tolerance for treating `(t_final - t0)/h` as an integer.
pub const GRID_TOL: f64 = 1e-10;

/// Step sizes of the uniform grid from `t0` to `t_final`: `n` full steps of
/// `h`, plus one shortened step when `h` does not divide the interval.
pub fn grid(t0: f64, t_final: f64, h: f64) -> Result<Vec<(f64, f64)>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if !(t_final >= t0) {
        return Err(Error::InvalidArgument(format!("t_final {t_final} precedes t0 {t0}")));
    }
    let span = t_final - t0;
    let ratio = span / h;
    let nearest = ratio.round();
    let (n_full, partial) = if (ratio - nearest).abs() <= GRID_TOL * nearest.max(1.0) {
        (nearest as usize, false)
    } else {
        (ratio.floor() as usize, true)
    };
    let mut steps = Vec::with_capacity(n_full + 1);
    for k in 0..n_full {
        steps.push((t0 + k as f64 * h, h));
    }
    if partial {
        let t = t0 + n_full as f64 * h;
        steps.push((t, t_final - t));
    }
    Ok(steps)
}

/// A sampled trajectory on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Advances `x0` over the grid, calling `observe(step_index, t, state)` for
/// the initial state and after every step. Returns the final state.
pub fn march_with<S, O>(stepper: &S, x0: S::State, t0: f64, t_final: f64, h: f64, mut observe: O) -> Result<S::State>
where
    S: OneStep + ?Sized,
    O: FnMut(usize, f64, &S::State),
{
    let steps = grid(t0, t_final, h)?;
    let mut x = x0;
    observe(0, t0, &x);
    let n = steps.len();
    for (k, (t, dt)) in steps.into_iter().enumerate() {
        x = stepper.step(&x, t, dt).map_err(|e| Error::AtStep {
            step: k,
            source: Box::new(e),
        })?;
        let t_next = if k + 1 == n { t_final } else { t + dt };
        observe(k + 1, t_next, &x);
    }
    Ok(x)
}

pub fn march<S: OneStep + ?Sized>(stepper: &S, x0: S::State, t0: f64, t_final: f64, h: f64) -> Result<Trajectory<S::State>> {
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    march_with(stepper, x0, t0, t_final, h, |_, t, x| {
        traj.times.push(t);
        traj.states.push(x.clone());
    })?;
    Ok(traj)
}

/// Integrates `p' = f(p, t)` with a built-in SLERP scheme.
pub fn integrate<F: VelocityField + ?Sized>(
    scheme: SchemeId,
    f: &F,
    p0: UnitVector3,
    t0: f64,
    t_final: f64,
    h: f64,
) -> Result<Trajectory<UnitVector3>> {
    march(&SlerpStepper::new(scheme, f), p0, t0, t_final, h)
}
