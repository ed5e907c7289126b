//! Spherical convex combinations: progressive SLERP and the weighted Fréchet mean.

use crate::error::{Error, Result};
use crate::geom::{exp_map, geodesic_distance, log_map, project, slerp, UnitVector3, Vec3};

/// Tolerance on `Σ wᵢ = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const FRECHET_TOL: f64 = 1e-13;
pub const FRECHET_MAX_ITER: usize = 200;

/// Nonnegative weights summing to one, paired with sphere points.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    items: Vec<(f64, UnitVector3)>,
}

impl WeightedPoints {
    pub fn new(items: Vec<(f64, UnitVector3)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("no points to average".into()));
        }
        if let Some((w, _)) = items.iter().find(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("negative or non-finite weight {w}")));
        }
        let sum: f64 = items.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightedPoints { items })
    }

    pub fn items(&self) -> &[(f64, UnitVector3)] {
        &self.items
    }

    /// `project(Σ wᵢ pᵢ)`.
    pub fn projected_mean(&self) -> Result<UnitVector3> {
        let sum: Vec3 = self.items.iter().map(|(w, p)| p.as_vec() * *w).sum();
        project(&sum).map_err(|_| Error::HemisphereViolation)
    }

    /// `Σ wᵢ dist(q, pᵢ)²`.
    pub fn objective(&self, q: &UnitVector3) -> f64 {
        self.items
            .iter()
            .map(|(w, p)| w * geodesic_distance(q, p).powi(2))
            .sum()
    }

    /// Riemannian gradient of [`Self::objective`] at `q`, `-2 Σ wᵢ log_q(pᵢ)`.
    pub fn gradient(&self, q: &UnitVector3) -> Vec3 {
        self.mean_log(q) * -2.0
    }

    fn mean_log(&self, q: &UnitVector3) -> Vec3 {
        self.items.iter().map(|(w, p)| log_map(q, p) * *w).sum()
    }
}

/// Weighted Fréchet mean by fixed-point iteration `q ← exp_q(Σ wᵢ log_q pᵢ)`,
/// started from the projected Euclidean mean.
///
/// Fails with [`Error::HemisphereViolation`] unless every point lies in the
/// open hemisphere centred on that starting guess.
pub fn frechet_mean(wp: &WeightedPoints, tol: f64, max_iter: usize) -> Result<UnitVector3> {
    let mut q = wp.projected_mean()?;
    if wp.items.iter().any(|(w, p)| *w > 0.0 && p.dot(&q) <= 0.0) {
        return Err(Error::HemisphereViolation);
    }
    let mut grad = f64::INFINITY;
    for _ in 0..=max_iter {
        let v = wp.mean_log(&q);
        grad = 2.0 * v.norm();
        if grad <= tol {
            return Ok(q);
        }
        q = exp_map(&q, &v);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        gradient: grad,
    })
}

/// Left fold of pairwise SLERPs, `r ← SLERP(r, pₖ, αₖ / (α₀ + … + αₖ))`.
/// Entries with zero weight are skipped.
pub fn progressive_slerp_combine(points: &[UnitVector3], alphas: &[f64]) -> Result<UnitVector3> {
    if points.len() != alphas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points but {} weights",
            points.len(),
            alphas.len()
        )));
    }
    if alphas.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be nonnegative".into()));
    }
    let total: f64 = alphas.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
    }
    let mut acc: Option<UnitVector3> = None;
    let mut cum = 0.0;
    for (p, &a) in points.iter().zip(alphas) {
        if a == 0.0 {
            continue;
        }
        cum += a;
        acc = Some(match acc {
            None => *p,
            Some(r) => slerp(&r, p, a / cum)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("all weights are zero".into()))
}
