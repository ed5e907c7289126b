//! A small stage program shared by every SLERP-based stepper.
//!
//! Slot 0 holds `pⁿ`. Each [`Op`] appends one slot: either an exponential-map
//! substep from an earlier slot, or a spherical convex combination of earlier
//! slots. The last slot is `pⁿ⁺¹`.

use crate::error::{Error, Result};
use crate::geom::{exp_map, project, slerp, UnitVector3, Vec3};

use super::frechet::{frechet_mean, WeightedPoints, FRECHET_MAX_ITER, FRECHET_TOL};

/// How combinations of three or more stage points are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CombineMode {
    /// Pairwise SLERP fold with the scheme's printed interpolation parameters.
    #[default]
    ProgressiveSlerp,
    /// Weighted Fréchet mean with the combination's implied weights.
    FrechetMean,
    /// `project(Σ wᵢ pᵢ)`, the Fréchet iteration's starting guess.
    ProjectedMean,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    /// `exp_{q_from}(coef · h · f(q_from, tⁿ + c_from h))`.
    Exp { from: usize, coef: f64 },
    /// Left fold `r ← SLERP(r, q_{terms[j+1]}, fold[j])` starting at `q_{terms[0]}`.
    /// `weights` are the barycentric weights the fold represents.
    Combine {
        terms: Vec<usize>,
        fold: Vec<f64>,
        weights: Vec<f64>,
    },
}

/// Barycentric weights represented by a progressive fold.
pub fn fold_weights(fold: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; fold.len() + 1];
    let mut rest = 1.0;
    for (j, &s) in fold.iter().enumerate().rev() {
        w[j + 1] = s * rest;
        rest *= 1.0 - s;
    }
    w[0] = rest;
    w
}

/// A compiled SLERP scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SlerpScheme {
    ops: Vec<Op>,
    /// Per-substep bound on `|coef| h ‖f‖`.
    limit: f64,
    /// Abscissa of each slot as a multiple of `h`.
    abscissae: Vec<f64>,
}

impl SlerpScheme {
    pub fn new(ops: Vec<Op>, limit: f64) -> Result<Self> {
        let mut abscissae = vec![0.0];
        for (i, op) in ops.iter().enumerate() {
            let slot = i + 1;
            let c = match op {
                Op::Exp { from, coef } => {
                    if *from >= slot {
                        return Err(Error::InvalidArgument(format!("op {i} reads future slot {from}")));
                    }
                    abscissae[*from] + coef
                }
                Op::Combine { terms, fold, weights } => {
                    if terms.len() < 2 || fold.len() + 1 != terms.len() || weights.len() != terms.len() {
                        return Err(Error::InvalidArgument(format!("op {i}: malformed combination")));
                    }
                    if terms.iter().any(|&k| k >= slot) {
                        return Err(Error::InvalidArgument(format!("op {i} reads a future slot")));
                    }
                    terms.iter().zip(weights).map(|(&k, w)| w * abscissae[k]).sum()
                }
            };
            abscissae.push(c);
        }
        Ok(SlerpScheme { ops, limit, abscissae })
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// Stage abscissae `cₖ`, slot `k` approximating the solution at `tⁿ + cₖ h`.
    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn exp_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Exp { .. })).count()
    }

    /// Pairwise SLERP calls under [`CombineMode::ProgressiveSlerp`].
    pub fn slerp_count(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op {
                Op::Combine { fold, .. } => fold.len(),
                Op::Exp { .. } => 0,
            })
            .sum()
    }

    /// Advances every point of `points` by one step. `rhs` receives all points
    /// of one stage and their common time and must return tangent vectors.
    pub fn step_batch<R>(
        &self,
        rhs: &mut R,
        points: &[UnitVector3],
        t: f64,
        h: f64,
        mode: CombineMode,
    ) -> Result<Vec<UnitVector3>>
    where
        R: FnMut(&[UnitVector3], f64) -> Result<Vec<Vec3>>,
    {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
        }
        let n = points.len();
        let mut slots: Vec<Vec<UnitVector3>> = Vec::with_capacity(self.ops.len() + 1);
        let mut velocity: Vec<Option<Vec<Vec3>>> = vec![None; self.ops.len() + 1];
        slots.push(points.to_vec());

        for (i, op) in self.ops.iter().enumerate() {
            let next = match op {
                Op::Exp { from, coef } => {
                    if velocity[*from].is_none() {
                        let v = rhs(&slots[*from], t + self.abscissae[*from] * h)?;
                        if v.len() != n {
                            return Err(Error::InvalidArgument(format!(
                                "right-hand side returned {} vectors for {n} points",
                                v.len()
                            )));
                        }
                        velocity[*from] = Some(v);
                    }
                    let vel = velocity[*from].as_ref().expect("cached above");
                    let scale = coef * h;
                    let mut out = Vec::with_capacity(n);
                    for (q, v) in slots[*from].iter().zip(vel) {
                        let length = scale.abs() * v.norm();
                        if !(length < self.limit) {
                            return Err(Error::StepTooLarge {
                                stage: i + 1,
                                length,
                                limit: self.limit,
                            });
                        }
                        out.push(exp_map(q, &(v * scale)));
                    }
                    out
                }
                Op::Combine { terms, fold, weights } => {
                    let mut out = Vec::with_capacity(n);
                    for j in 0..n {
                        out.push(combine(&slots, terms, fold, weights, j, mode)?);
                    }
                    out
                }
            };
            slots.push(next);
        }
        Ok(slots.pop().expect("slot 0 always present"))
    }
}

fn combine(
    slots: &[Vec<UnitVector3>],
    terms: &[usize],
    fold: &[f64],
    weights: &[f64],
    j: usize,
    mode: CombineMode,
) -> Result<UnitVector3> {
    if terms.len() >= 3 && mode != CombineMode::ProgressiveSlerp {
        let wp = WeightedPoints::new(terms.iter().zip(weights).map(|(&k, &w)| (w, slots[k][j])).collect())?;
        return match mode {
            CombineMode::FrechetMean => frechet_mean(&wp, FRECHET_TOL, FRECHET_MAX_ITER),
            _ => {
                let sum: Vec3 = wp.items().iter().map(|(w, p)| p.as_vec() * *w).sum();
                project(&sum)
            }
        };
    }
    let mut r = slots[terms[0]][j];
    for (&k, &s) in terms[1..].iter().zip(fold) {
        r = slerp(&r, &slots[k][j], s)?;
    }
    Ok(r)
}
