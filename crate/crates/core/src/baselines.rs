//! Cartesian Runge–Kutta methods in the embedding space and their projected
//! variants. Off-sphere states use the radial extension `f(x, t) = f(x/‖x‖, t)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::geom::{project, Vec3};
use crate::integrators::OneStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineId {
    Fe,
    Rk2,
    Rk3,
    Rk4,
    Tvdrk2,
    Tvdrk3,
    Pfe,
    Prk2,
    Prk3,
    Prk4,
    Ptvdrk2,
    /// PTVDRK2 with every stage projected.
    Ptvdrk2p,
    Ptvdrk3,
    /// PTVDRK3 with every stage projected.
    Ptvdrk3p,
}

impl BaselineId {
    pub const ALL: [BaselineId; 14] = [
        BaselineId::Fe,
        BaselineId::Rk2,
        BaselineId::Rk3,
        BaselineId::Rk4,
        BaselineId::Tvdrk2,
        BaselineId::Tvdrk3,
        BaselineId::Pfe,
        BaselineId::Prk2,
        BaselineId::Prk3,
        BaselineId::Prk4,
        BaselineId::Ptvdrk2,
        BaselineId::Ptvdrk2p,
        BaselineId::Ptvdrk3,
        BaselineId::Ptvdrk3p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineId::Fe => "fe",
            BaselineId::Rk2 => "rk2",
            BaselineId::Rk3 => "rk3",
            BaselineId::Rk4 => "rk4",
            BaselineId::Tvdrk2 => "tvdrk2",
            BaselineId::Tvdrk3 => "tvdrk3",
            BaselineId::Pfe => "pfe",
            BaselineId::Prk2 => "prk2",
            BaselineId::Prk3 => "prk3",
            BaselineId::Prk4 => "prk4",
            BaselineId::Ptvdrk2 => "ptvdrk2",
            BaselineId::Ptvdrk2p => "ptvdrk2p",
            BaselineId::Ptvdrk3 => "ptvdrk3",
            BaselineId::Ptvdrk3p => "ptvdrk3p",
        }
    }

    pub fn is_projected(self) -> bool {
        self.projections() > 0
    }

    /// Projections per step.
    pub fn projections(self) -> usize {
        match self {
            BaselineId::Fe
            | BaselineId::Rk2
            | BaselineId::Rk3
            | BaselineId::Rk4
            | BaselineId::Tvdrk2
            | BaselineId::Tvdrk3 => 0,
            BaselineId::Ptvdrk2p => 3,
            BaselineId::Ptvdrk3p => 5,
            _ => 1,
        }
    }

    /// Order of the underlying Cartesian method.
    pub fn nominal_order(self) -> u32 {
        match self {
            BaselineId::Fe | BaselineId::Pfe => 1,
            BaselineId::Rk2
            | BaselineId::Tvdrk2
            | BaselineId::Prk2
            | BaselineId::Ptvdrk2
            | BaselineId::Ptvdrk2p => 2,
            BaselineId::Rk4 | BaselineId::Prk4 => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for BaselineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('\'', "p");
        BaselineId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(&s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown baseline '{s}'")))
    }
}

fn p(x: Vec3) -> Result<Vec3> {
    Ok(project(&x)?.into_vec())
}

/// One step of a baseline method from `x` (not necessarily on the sphere).
pub fn baseline_step<F: VelocityField + ?Sized>(id: BaselineId, f: &F, x: &Vec3, t: f64, h: f64) -> Result<Vec3> {
    let x = *x;
    let ev = |y: &Vec3, tt: f64| f.eval_extended(y, tt);
    let out = match id {
        BaselineId::Fe => x + ev(&x, t)? * h,
        BaselineId::Pfe => p(x + ev(&x, t)? * h)?,
        BaselineId::Rk2 | BaselineId::Prk2 => {
            let s1 = ev(&x, t)?;
            let q1 = x + s1 * h;
            let s2 = ev(&q1, t + h)?;
            let y = x + (s1 + s2) * (0.5 * h);
            if id == BaselineId::Prk2 {
                p(y)?
            } else {
                y
            }
        }
        BaselineId::Rk3 | BaselineId::Prk3 => {
            let s1 = ev(&x, t)?;
            let q1 = x + s1 * (0.5 * h);
            let s2 = ev(&q1, t + 0.5 * h)?;
            let q2 = x + s2 * (2.0 * h) - s1 * h;
            let s3 = ev(&q2, t + h)?;
            let y = x + (s1 + s2 * 4.0 + s3) * (h / 6.0);
            if id == BaselineId::Prk3 {
                p(y)?
            } else {
                y
            }
        }
        BaselineId::Rk4 | BaselineId::Prk4 => {
            let s1 = ev(&x, t)?;
            let s2 = ev(&(x + s1 * (0.5 * h)), t + 0.5 * h)?;
            let s3 = ev(&(x + s2 * (0.5 * h)), t + 0.5 * h)?;
            let s4 = ev(&(x + s3 * h), t + h)?;
            let y = x + (s1 + s2 * 2.0 + s3 * 2.0 + s4) * (h / 6.0);
            if id == BaselineId::Prk4 {
                p(y)?
            } else {
                y
            }
        }
        BaselineId::Tvdrk2 | BaselineId::Ptvdrk2 => {
            let q1 = x + ev(&x, t)? * h;
            let q2 = q1 + ev(&q1, t + h)? * h;
            let y = (x + q2) * 0.5;
            if id == BaselineId::Ptvdrk2 {
                p(y)?
            } else {
                y
            }
        }
        BaselineId::Ptvdrk2p => {
            let q1 = p(x + ev(&x, t)? * h)?;
            let q2 = p(q1 + ev(&q1, t + h)? * h)?;
            p((x + q2) * 0.5)?
        }
        BaselineId::Tvdrk3 | BaselineId::Ptvdrk3 => {
            let q1 = x + ev(&x, t)? * h;
            let q2 = q1 + ev(&q1, t + h)? * h;
            let q3 = (x * 3.0 + q2) * 0.25;
            let q4 = q3 + ev(&q3, t + 0.5 * h)? * h;
            let y = (x + q4 * 2.0) / 3.0;
            if id == BaselineId::Ptvdrk3 {
                p(y)?
            } else {
                y
            }
        }
        BaselineId::Ptvdrk3p => {
            let q1 = p(x + ev(&x, t)? * h)?;
            let q2 = p(q1 + ev(&q1, t + h)? * h)?;
            let q3 = p((x * 3.0 + q2) * 0.25)?;
            let q4 = p(q3 + ev(&q3, t + 0.5 * h)? * h)?;
            p((x + q4 * 2.0) / 3.0)?
        }
    };
    Ok(out)
}

/// A baseline method bound to a velocity field.
pub struct BaselineStepper<'a, F: ?Sized> {
    pub id: BaselineId,
    pub field: &'a F,
}

impl<'a, F: VelocityField + ?Sized> BaselineStepper<'a, F> {
    pub fn new(id: BaselineId, field: &'a F) -> Self {
        BaselineStepper { id, field }
    }
}

impl<F: VelocityField + ?Sized> OneStep for BaselineStepper<'_, F> {
    type State = Vec3;

    fn step(&self, x: &Vec3, t: f64, h: f64) -> Result<Vec3> {
        baseline_step(self.id, self.field, x, t, h)
    }
}

/// Internal-projection schemes analysed through their polar-angle recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleScheme {
    Pfe,
    Ptvdrk2p,
    Ptvdrk3p,
}

/// One step of the angle recurrence for `θ' = θ` along a great circle.
///
/// A projected Euler substep turns the angle by `arctan(h)` per unit angle,
/// so it multiplies `θ` by `g = 1 + arctan(h) = 1 + h - h³/3 + …`; the
/// combination stages average angles linearly.
pub fn angle_recurrence(scheme: AngleScheme, theta: f64, h: f64) -> f64 {
    let g = 1.0 + h.atan();
    match scheme {
        AngleScheme::Pfe => g * theta,
        AngleScheme::Ptvdrk2p => 0.5 * (1.0 + g * g) * theta,
        AngleScheme::Ptvdrk3p => {
            let theta3 = 0.25 * (3.0 + g * g) * theta;
            let theta4 = g * theta3;
            (theta + 2.0 * theta4) / 3.0
        }
    }
}
