//! Price curves along the segment of mixtures `pA + (1 - p)B`.
//!
//! For each `p` the curves record the discounted geometric mean `f`, the
//! harmonic mean `h`, the interior solution `g` (absent where the simultaneous
//! equations have no solution) and the price `u`, which equals `f` in the
//! full-investment regime and `g` otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{Game, Rate};
use crate::solver::{self, Regime, SolverConfig};

/// Bisection tolerance in `p` for regime-boundary roots inserted into the grid.
pub const CROSSING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureCurves {
    pub grid: Vec<f64>,
    pub f_vals: Vec<f64>,
    pub g_vals: Vec<Option<f64>>,
    pub h_vals: Vec<f64>,
    pub u_vals: Vec<f64>,
    pub regime: Vec<Regime>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    f: f64,
    g: Option<f64>,
    h: f64,
    u: f64,
    regime: Regime,
}

fn evaluate(ga: &Game, gb: &Game, p: f64, rate: Rate, cfg: &SolverConfig) -> Result<Point> {
    let game = ga.mix(gb, p)?;
    let f = game.geometric_price(rate);
    let h = game.harmonic_price();
    let out = solver::price(&game, rate, cfg).map_err(|e| e.at_mixture(p))?;
    let g = match out.regime {
        Regime::Interior => Some(out.price),
        Regime::FullInvestment => match solver::interior_price(&game, rate, cfg) {
            Ok(o) => Some(o.price),
            Err(Error::NoSolution { .. }) => None,
            Err(e) => return Err(e.at_mixture(p)),
        },
    };
    Ok(Point {
        f,
        g,
        h,
        u: out.price,
        regime: out.regime,
    })
}

fn f_minus_h(ga: &Game, gb: &Game, p: f64, rate: Rate) -> Result<f64> {
    let game = ga.mix(gb, p)?;
    Ok(game.geometric_price(rate) - game.harmonic_price())
}

/// Root of `f - h` in `[lo, hi]` by bisection, returned on the `f >= h` side so
/// the interior solution exists there.
fn crossing(ga: &Game, gb: &Game, mut lo: f64, mut hi: f64, rate: Rate) -> Result<f64> {
    let lo_positive = f_minus_h(ga, gb, lo, rate)? >= 0.0;
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        if (f_minus_h(ga, gb, mid, rate)? >= 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if lo_positive { lo } else { hi })
}

/// Samples the four curves on `n_grid` uniform points of `[0, 1]`, with every
/// sign change of `f - h` refined by bisection and inserted into the grid.
pub fn curves(
    ga: &Game,
    gb: &Game,
    rate: Rate,
    n_grid: usize,
    cfg: &SolverConfig,
) -> Result<MixtureCurves> {
    if n_grid < 3 {
        return Err(Error::input(format!(
            "grid: need at least 3 points, got {n_grid}"
        )));
    }
    if !ga.shares_distribution(gb) {
        return Err(Error::input("game_b: distribution differs from game_a"));
    }
    cfg.validate()?;
    let step = 1.0 / (n_grid - 1) as f64;
    let mut grid: Vec<f64> = (0..n_grid).map(|i| i as f64 * step).collect();
    grid[n_grid - 1] = 1.0;

    // Degenerate points with f = h = 0 (a zero payoff) carry no regime boundary.
    let diffs = grid
        .par_iter()
        .map(|&p| f_minus_h(ga, gb, p, rate))
        .collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..n_grid - 1 {
        let (d0, d1) = (diffs[i], diffs[i + 1]);
        if d0 == 0.0 || d1 == 0.0 {
            continue;
        }
        if (d0 > 0.0) != (d1 > 0.0) {
            roots.push(crossing(ga, gb, grid[i], grid[i + 1], rate)?);
        }
    }
    for root in roots {
        let near_existing = grid.iter().any(|&p| (p - root).abs() <= 1e-12);
        if !near_existing {
            let at = grid.partition_point(|&p| p < root);
            grid.insert(at, root);
        }
    }

    let points = grid
        .par_iter()
        .map(|&p| evaluate(ga, gb, p, rate, cfg))
        .collect::<Result<Vec<_>>>()?;

    Ok(MixtureCurves {
        f_vals: points.iter().map(|pt| pt.f).collect(),
        g_vals: points.iter().map(|pt| pt.g).collect(),
        h_vals: points.iter().map(|pt| pt.h).collect(),
        u_vals: points.iter().map(|pt| pt.u).collect(),
        regime: points.iter().map(|pt| pt.regime).collect(),
        grid,
    })
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

impl MixtureCurves {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `p,f,g,h,u,regime` rows with 12 significant digits; absent `g` is empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,f,g,h,u,regime\n");
        for i in 0..self.len() {
            let g = self.g_vals[i].map(fmt12).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt12(self.grid[i]),
                fmt12(self.f_vals[i]),
                g,
                fmt12(self.h_vals[i]),
                fmt12(self.u_vals[i]),
                self.regime[i].as_str()
            );
        }
        out
    }

    /// `g` on every grid point, or `None` if it is absent anywhere.
    pub fn g_complete(&self) -> Option<Vec<f64>> {
        self.g_vals.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub curve: String,
    /// Largest gap by which a chord between two samples lies above the curve
    /// at a sample in between; 0 when the samples are concave.
    pub max_violation: f64,
    /// `(p_i, p_j, λ)` with the worst sample at `λ p_i + (1 - λ) p_j`.
    pub violating_triple: Option<(f64, f64, f64)>,
}

/// Midpoint-concavity check over all sample triples `p_i < p_k < p_j`.
///
/// The maximum over triples of the chord value at `p_k` is the upper concave
/// hull at `p_k`, so one monotone-chain pass gives the worst gap in O(n). The
/// gap is zero exactly when consecutive slopes are nonincreasing.
pub fn check_concavity(curve: &str, vals: &[f64], grid: &[f64]) -> Result<ConcavityReport> {
    if vals.len() != grid.len() {
        return Err(Error::input(format!(
            "{curve}: {} values for {} grid points",
            vals.len(),
            grid.len()
        )));
    }
    if vals.len() < 3 {
        return Err(Error::input(format!("{curve}: need at least 3 samples")));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("{curve}: non-finite sample")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::input(format!(
            "{curve}: grid must be strictly increasing"
        )));
    }

    // Upper hull indices, left to right.
    let mut hull: Vec<usize> = Vec::with_capacity(vals.len());
    for k in 0..vals.len() {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop j when it lies on or below the chord from i to k.
            let cross = (grid[j] - grid[i]) * (vals[k] - vals[i])
                - (vals[j] - vals[i]) * (grid[k] - grid[i]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }

    let mut report = ConcavityReport {
        curve: curve.to_string(),
        max_violation: 0.0,
        violating_triple: None,
    };
    for edge in hull.windows(2) {
        let (i, j) = (edge[0], edge[1]);
        for k in i + 1..j {
            let lambda = (grid[j] - grid[k]) / (grid[j] - grid[i]);
            let chord = lambda * vals[i] + (1.0 - lambda) * vals[j];
            let gap = chord - vals[k];
            if gap > report.max_violation {
                report.max_violation = gap;
                report.violating_triple = Some((grid[i], grid[j], lambda));
            }
        }
    }
    Ok(report)
}

/// Grid points where `f` and `h` agree within `tol`, checking that `g` agrees
/// with both within `10 tol` wherever it is present.
///
/// Points where `h = 0` are skipped: there `f = h = 0` holds trivially.
pub fn equivalence_points(c: &MixtureCurves, tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        let (f, h) = (c.f_vals[i], c.h_vals[i]);
        if h == 0.0 || (f - h).abs() > tol {
            continue;
        }
        if let Some(g) = c.g_vals[i] {
            if (f - g).abs() > 10.0 * tol || (g - h).abs() > 10.0 * tol {
                return Err(Error::Invariant(format!(
                    "f = h at p = {} but f = {f}, g = {g}, h = {h}",
                    c.grid[i]
                )));
            }
        }
        out.push(c.grid[i]);
    }
    Ok(out)
}

/// Largest absolute difference between neighbouring samples.
pub fn max_adjacent_jump(vals: &[f64]) -> f64 {
    vals.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}
