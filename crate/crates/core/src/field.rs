use crate::error::Result;
use crate::geom::{project, TangentVector, UnitVector3, Vec3};

/// A time-dependent tangent vector field `f: S² × [0, ∞) → T S²`.
pub trait VelocityField: Sync {
    fn eval(&self, p: &UnitVector3, t: f64) -> Result<TangentVector>;

    fn is_autonomous(&self) -> bool {
        false
    }

    /// Extension off the sphere by radial projection, `f(x, t) = f(x/‖x‖, t)`.
    fn eval_extended(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let p = project(x)?;
        Ok(*self.eval(&p, t)?.vector())
    }
}

impl<F: VelocityField + ?Sized> VelocityField for &F {
    fn eval(&self, p: &UnitVector3, t: f64) -> Result<TangentVector> {
        (**self).eval(p, t)
    }

    fn is_autonomous(&self) -> bool {
        (**self).is_autonomous()
    }
}

/// Adapts a closure returning an embedded-space vector; the result is
/// projected onto the tangent plane.
pub struct FnField<F> {
    f: F,
    autonomous: bool,
}

impl<F> FnField<F>
where
    F: Fn(&UnitVector3, f64) -> Vec3 + Sync,
{
    pub fn new(f: F) -> Self {
        FnField { f, autonomous: false }
    }

    pub fn autonomous(f: F) -> Self {
        FnField { f, autonomous: true }
    }
}

impl<F> VelocityField for FnField<F>
where
    F: Fn(&UnitVector3, f64) -> Vec3 + Sync,
{
    fn eval(&self, p: &UnitVector3, t: f64) -> Result<TangentVector> {
        Ok(TangentVector::new(*p, (self.f)(p, t)))
    }

    fn is_autonomous(&self) -> bool {
        self.autonomous
    }
}

/// The zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl VelocityField for ZeroField {
    fn eval(&self, p: &UnitVector3, _t: f64) -> Result<TangentVector> {
        Ok(TangentVector::zero(*p))
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}
