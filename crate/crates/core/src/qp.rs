//! Minimum-norm point of a polytope inside the unit box.
//!
//! Solves `min ½‖x‖²` subject to `a_k · x ≥ b_k` and `0 ≤ x ≤ 1` with a primal
//! active-set method started from the all-ones corner. Dimensions are tiny
//! (a handful of variables, at most a few hundred constraints), so each step
//! solves the Gram system of the working set by dense elimination.

use crate::error::{Error, Result};

/// The half-space `normal · x ≥ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        HalfSpace { normal, offset }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = m.split_at_mut(row);
            for (target, source) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= factor * source;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub norm: f64,
    /// Indices (into the caller's half-spaces) of cuts active at the solution.
    pub active_cuts: Vec<usize>,
    pub iterations: usize,
}

/// Minimum-norm point of `{x ∈ [0,1]^n : a_k · x ≥ b_k}`.
///
/// Fails with [`Error::Infeasible`] when the all-ones corner violates a cut by
/// more than rounding; every cut generated from a portfolio contains that corner.
pub fn min_norm_in_box(n: usize, cuts: &[HalfSpace]) -> Result<QpSolution> {
    const FEAS_TOL: f64 = 1e-9;
    let ones = vec![1.0; n];
    // Constraint list: cuts, then x_i >= 0, then -x_i >= -1.
    let mut rows: Vec<HalfSpace> = Vec::with_capacity(cuts.len() + 2 * n);
    for (k, cut) in cuts.iter().enumerate() {
        if cut.normal.len() != n {
            return Err(Error::input(format!(
                "cut {k}: normal has {} entries, expected {n}",
                cut.normal.len()
            )));
        }
        let slack = cut.slack(&ones);
        if slack < -FEAS_TOL * cut.offset.abs().max(1.0) {
            return Err(Error::Infeasible(format!(
                "cut {k} excludes the all-ones corner (slack {slack})"
            )));
        }
        // Absorb rounding so the start point is feasible.
        let offset = if slack < 0.0 {
            cut.offset + slack
        } else {
            cut.offset
        };
        rows.push(HalfSpace::new(cut.normal.clone(), offset));
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push(HalfSpace::new(e, 0.0));
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = -1.0;
        rows.push(HalfSpace::new(e, -1.0));
    }

    let mut x = ones;
    let mut working: Vec<usize> = Vec::new();
    let max_iter = 50 * (rows.len() + n) + 100;
    for iteration in 1..=max_iter {
        // Equality-constrained minimizer y = A_W^T λ with A_W y = b_W.
        let (target, lambda) = if working.is_empty() {
            (vec![0.0; n], Vec::new())
        } else {
            let gram: Vec<Vec<f64>> = working
                .iter()
                .map(|&i| {
                    working
                        .iter()
                        .map(|&j| dot(&rows[i].normal, &rows[j].normal))
                        .collect()
                })
                .collect();
            let rhs: Vec<f64> = working.iter().map(|&i| rows[i].offset).collect();
            let lambda = solve_dense(gram, rhs)
                .ok_or_else(|| Error::Invariant("dependent working set in min-norm QP".into()))?;
            let mut y = vec![0.0; n];
            for (&i, &l) in working.iter().zip(&lambda) {
                for (yk, ak) in y.iter_mut().zip(&rows[i].normal) {
                    *yk += l * ak;
                }
            }
            (y, lambda)
        };
        let step: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let step_size = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));

        if step_size <= 1e-13 {
            let most_negative = lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < -1e-12)
                .min_by(|a, b| a.1.total_cmp(b.1));
            match most_negative {
                None => {
                    let norm = dot(&x, &x).sqrt();
                    let mut active_cuts: Vec<usize> = working
                        .iter()
                        .copied()
                        .filter(|&i| i < cuts.len())
                        .collect();
                    active_cuts.sort_unstable();
                    return Ok(QpSolution {
                        x,
                        norm,
                        active_cuts,
                        iterations: iteration,
                    });
                }
                Some((pos, _)) => {
                    working.remove(pos);
                    continue;
                }
            }
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for (j, row) in rows.iter().enumerate() {
            if working.contains(&j) {
                continue;
            }
            let along = dot(&row.normal, &step);
            if along < -1e-15 {
                let ratio = (row.offset - dot(&row.normal, &x)) / along;
                let ratio = ratio.max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(j);
                }
            }
        }
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi += alpha * si;
        }
        if let Some(j) = blocking {
            working.push(j);
        }
    }
    Err(Error::NonConvergence {
        what: "min-norm QP",
        iterations: max_iter,
    })
}
