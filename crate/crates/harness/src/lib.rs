//! Experiment drivers for `sphere-rk`: convergence tables with fitted orders,
//! stability runs on the projected linear model, closed-form checks of the
//! norm and angle expansions, and SLERP parity.

pub mod convergence;
pub mod method;
pub mod stability;
pub mod verify;

use thiserror::Error;

pub use convergence::{fit_order, run_convergence, ConvergenceReport, ConvergenceRow, Problem, Reference};
pub use method::Method;
pub use stability::{run_stability, StabilityRun, Verdict};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] sphere_rk::Error),

    #[error("reference solution unavailable: {0}")]
    ReferenceUnavailable(#[source] sphere_rk::Error),

    #[error("cannot fit an order through a non-positive error {err:e} at h = {h}")]
    NonPositiveError { h: f64, err: f64 },

    #[error("order fit needs at least {needed} usable rows, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("invalid step list '{0}'")]
    BadStepList(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
