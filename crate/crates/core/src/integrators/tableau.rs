//! Shu–Osher tableaux and their translation into SLERP schemes.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

use super::scheme::{fold_weights, Op, SlerpScheme};

pub const CONSISTENCY_TOL: f64 = 1e-12;

/// `u⁽ⁱ⁾ = Σₖ αᵢₖ u⁽ᵏ⁾ + βᵢₖ h f(u⁽ᵏ⁾)` for `i = 1..s`, `k < i`.
///
/// `alpha[i-1]` and `beta[i-1]` hold row `i` and have length `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SspTableau {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
}

impl SspTableau {
    pub fn new(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::InvalidArgument("alpha and beta must have the same nonzero row count".into()));
        }
        for (i, (a, b)) in alpha.iter().zip(&beta).enumerate() {
            let row = i + 1;
            if a.len() != row || b.len() != row {
                return Err(Error::InvalidArgument(format!("row {row} must have {row} entries")));
            }
            for (k, (&aik, &bik)) in a.iter().zip(b).enumerate() {
                if !(aik >= 0.0) {
                    return Err(Error::InvalidArgument(format!("alpha[{row}][{k}] = {aik} is negative")));
                }
                if aik == 0.0 && bik != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "alpha[{row}][{k}] = 0 but beta[{row}][{k}] = {bik}"
                    )));
                }
            }
            let sum: f64 = a.iter().sum();
            if (sum - 1.0).abs() > CONSISTENCY_TOL {
                return Err(Error::InvalidArgument(format!("row {row}: alphas sum to {sum}")));
            }
        }
        Ok(SspTableau { alpha, beta })
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self, i: usize, k: usize) -> f64 {
        self.alpha[i - 1][k]
    }

    pub fn beta(&self, i: usize, k: usize) -> f64 {
        self.beta[i - 1][k]
    }

    /// Two-stage TVD RK (Heun form).
    pub fn tvdrk2() -> Self {
        Self::new(vec![vec![1.0], vec![0.5, 0.5]], vec![vec![1.0], vec![0.0, 0.5]]).expect("valid tableau")
    }

    /// Three-stage third-order TVD RK.
    pub fn tvdrk3() -> Self {
        Self::new(
            vec![vec![1.0], vec![0.75, 0.25], vec![1.0 / 3.0, 0.0, 2.0 / 3.0]],
            vec![vec![1.0], vec![0.0, 0.25], vec![0.0, 0.0, 2.0 / 3.0]],
        )
        .expect("valid tableau")
    }

    /// Ketcheson's ten-stage fourth-order SSP method.
    pub fn ssprk104() -> Self {
        let s = 10;
        let mut alpha: Vec<Vec<f64>> = (1..=s).map(|i| vec![0.0; i]).collect();
        let mut beta = alpha.clone();
        for i in 1..=s {
            match i {
                5 => {
                    alpha[4][0] = 0.6;
                    alpha[4][4] = 0.4;
                    beta[4][4] = 0.4 / 6.0;
                }
                10 => {
                    alpha[9][0] = 1.0 / 25.0;
                    alpha[9][4] = 9.0 / 25.0;
                    beta[9][4] = 9.0 / 25.0 / 6.0;
                    alpha[9][9] = 0.6;
                    beta[9][9] = 0.1;
                }
                _ => {
                    alpha[i - 1][i - 1] = 1.0;
                    beta[i - 1][i - 1] = 1.0 / 6.0;
                }
            }
        }
        Self::new(alpha, beta).expect("valid tableau")
    }

    /// Replaces every forward-Euler substep `u⁽ᵏ⁾ + (βᵢₖ/αᵢₖ) h f(u⁽ᵏ⁾)` by an
    /// exponential-map step and every convex combination by a progressive
    /// SLERP fold in increasing `k`. Identical substeps are shared.
    pub fn to_slerp_scheme(&self) -> SlerpScheme {
        let mut ops: Vec<Op> = Vec::new();
        let mut stage_slot = vec![0usize];
        let mut exp_cache: Vec<(usize, f64, usize)> = Vec::new();
        for i in 1..=self.stages() {
            let mut terms = Vec::new();
            let mut alphas = Vec::new();
            for k in 0..i {
                let a = self.alpha(i, k);
                if a == 0.0 {
                    continue;
                }
                let b = self.beta(i, k);
                let slot = if b == 0.0 {
                    stage_slot[k]
                } else {
                    let from = stage_slot[k];
                    let coef = b / a;
                    match exp_cache.iter().find(|(f, c, _)| *f == from && *c == coef) {
                        Some(&(_, _, s)) => s,
                        None => {
                            ops.push(Op::Exp { from, coef });
                            let s = ops.len();
                            exp_cache.push((from, coef, s));
                            s
                        }
                    }
                };
                terms.push(slot);
                alphas.push(a);
            }
            if terms.len() == 1 {
                stage_slot.push(terms[0]);
                continue;
            }
            let mut cum = alphas[0];
            let fold: Vec<f64> = alphas[1..]
                .iter()
                .map(|&a| {
                    cum += a;
                    a / cum
                })
                .collect();
            let weights = fold_weights(&fold);
            ops.push(Op::Combine { terms, fold, weights });
            stage_slot.push(ops.len());
        }
        SlerpScheme::new(ops, FRAC_PI_2).expect("tableau produces a well-formed program")
    }
}
