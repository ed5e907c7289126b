use std::fmt;
use std::str::FromStr;

use sphere_rk::baselines::{BaselineId, BaselineStepper};
use sphere_rk::integrators::{march_with, CombineMode, SlerpStepper};
use sphere_rk::{SchemeId, UnitVector3, Vec3, VelocityField};

use crate::HarnessError;

/// Anything `converge` can run: a SLERP scheme with a combination mode, or a
/// Cartesian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Slerp { id: SchemeId, mode: CombineMode },
    Baseline(BaselineId),
}

const FRECHET_SUFFIX: &str = "-frechet";
const PROJECTED_MEAN_SUFFIX: &str = "-projmean";

impl Method {
    pub fn slerp(id: SchemeId) -> Self {
        Method::Slerp {
            id,
            mode: CombineMode::ProgressiveSlerp,
        }
    }

    pub fn frechet(id: SchemeId) -> Self {
        Method::Slerp {
            id,
            mode: CombineMode::FrechetMean,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::Slerp { id, mode } => match mode {
                CombineMode::ProgressiveSlerp => id.name().to_string(),
                CombineMode::FrechetMean => format!("{id}{FRECHET_SUFFIX}"),
                CombineMode::ProjectedMean => format!("{id}{PROJECTED_MEAN_SUFFIX}"),
            },
            Method::Baseline(id) => id.name().to_string(),
        }
    }

    /// The rows of the classic comparison table, in display order.
    pub fn table2() -> Vec<Method> {
        use BaselineId::*;
        let mut v: Vec<Method> = [SchemeId::Sfe, SchemeId::Stvdrk2, SchemeId::Stvdrk3]
            .into_iter()
            .map(Method::slerp)
            .collect();
        v.extend(
            [Tvdrk2, Tvdrk3, Rk3, Rk4, Prk3, Prk4, Ptvdrk2, Ptvdrk2p, Ptvdrk3, Ptvdrk3p]
                .into_iter()
                .map(Method::Baseline),
        );
        v
    }

    /// The fourth-order SLERP attempts, progressive and Fréchet.
    pub fn fourth_order() -> Vec<Method> {
        vec![
            Method::slerp(SchemeId::Stvdrk4),
            Method::slerp(SchemeId::Ssprk54),
            Method::slerp(SchemeId::Ssprk104),
            Method::frechet(SchemeId::Ssprk104),
        ]
    }

    /// Every SLERP scheme (progressive) plus Fréchet SSPRK(10,4), then every baseline.
    pub fn all() -> Vec<Method> {
        let mut v: Vec<Method> = SchemeId::ALL.into_iter().map(Method::slerp).collect();
        v.push(Method::frechet(SchemeId::Ssprk104));
        v.extend(BaselineId::ALL.into_iter().map(Method::Baseline));
        v
    }

    /// `true` when the method keeps iterates on the sphere by construction.
    pub fn stays_on_sphere(&self) -> bool {
        match self {
            Method::Slerp { .. } => true,
            Method::Baseline(id) => id.is_projected(),
        }
    }

    /// Endpoint of `p' = f(p, t)` from `p0` at `t0` to `t_final` with step `h`.
    pub fn endpoint<F: VelocityField + ?Sized>(
        &self,
        f: &F,
        p0: UnitVector3,
        t0: f64,
        t_final: f64,
        h: f64,
    ) -> sphere_rk::Result<Vec3> {
        match *self {
            Method::Slerp { id, mode } => {
                let stepper = SlerpStepper::new(id, f).with_mode(mode);
                Ok(march_with(&stepper, p0, t0, t_final, h, |_, _, _| {})?.into_vec())
            }
            Method::Baseline(id) => march_with(&BaselineStepper::new(id, f), p0.into_vec(), t0, t_final, h, |_, _, _| {}),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let lower = s.to_ascii_lowercase();
        for (suffix, mode) in [
            (FRECHET_SUFFIX, CombineMode::FrechetMean),
            (PROJECTED_MEAN_SUFFIX, CombineMode::ProjectedMean),
        ] {
            if let Some(base) = lower.strip_suffix(suffix) {
                let id = base.parse().map_err(|_| HarnessError::UnknownMethod(s.to_string()))?;
                return Ok(Method::Slerp { id, mode });
            }
        }
        if let Ok(id) = lower.parse::<SchemeId>() {
            return Ok(Method::slerp(id));
        }
        lower
            .parse::<BaselineId>()
            .map(Method::Baseline)
            .map_err(|_| HarnessError::UnknownMethod(s.to_string()))
    }
}
