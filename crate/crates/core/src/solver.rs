//! Growth-optimal price and reinvestment proportion of a single game.
//!
//! For a price `u` and proportion `t` the per-round growth factor is
//! `G_u(t) = exp(sum w log(a t / u - t + 1))`. The price is the `u` at which the
//! best attainable growth `max_t G_u(t)` equals the target `e^r`:
//!
//! * if the discounted geometric mean `f` does not exceed the harmonic mean `h`,
//!   the price is `f` and the whole capital is reinvested (`t = 1`);
//! * otherwise `u` and `t` solve `G_u(t) = e^r` together with the first-order
//!   condition `sum w (a - u) / (a t - u t + u) = 0`.
//!
//! Both solves are bisections. The marginal is strictly decreasing in `t`, and
//! the optimal growth is strictly decreasing in `u` on `(h, E)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, Rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    FullInvestment,
    Interior,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::FullInvestment => "FullInvestment",
            Regime::Interior => "Interior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `G_u(t) - e^r` at the solution.
    pub growth: f64,
    /// Marginal (first-order condition) at the solution.
    pub marginal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingOutcome {
    pub price: f64,
    pub proportion: f64,
    pub regime: Regime,
    pub growth_at_solution: f64,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative tolerance on the growth equation and on the price bracket.
    pub outer_tol: f64,
    /// Tolerance on the marginal root in `t`.
    pub inner_tol: f64,
    pub max_iter: usize,
    /// `t` stays below `1 - t_ceiling_margin` for games with a zero payoff.
    pub t_ceiling_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_tol: 1e-10,
            inner_tol: 1e-12,
            max_iter: 200,
            t_ceiling_margin: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("t_ceiling_margin", self.t_ceiling_margin),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name}: must be positive, got {v}")));
            }
        }
        if self.t_ceiling_margin >= 1.0 {
            return Err(Error::input("t_ceiling_margin: must be below 1"));
        }
        if self.max_iter < 10 {
            return Err(Error::input(format!(
                "max_iter: must be at least 10, got {}",
                self.max_iter
            )));
        }
        Ok(())
    }
}

fn check_price(u: f64) -> Result<()> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::input(format!("u: price must be positive, got {u}")));
    }
    Ok(())
}

/// `sum w log(a t / u - t + 1)`, the logarithm of [`growth`].
pub fn log_growth(g: &Game, u: f64, t: f64) -> Result<f64> {
    check_price(u)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    let mut acc = 0.0;
    for atom in g.atoms() {
        let excess = t * (atom.payoff / u - 1.0);
        if !(excess > -1.0) {
            return Err(Error::Domain(format!(
                "wealth factor {} at payoff {} (u = {u}, t = {t})",
                1.0 + excess,
                atom.payoff
            )));
        }
        acc += atom.weight * excess.ln_1p();
    }
    Ok(acc)
}

/// Expected geometric growth factor per round, `exp(sum w log(a t / u - t + 1))`.
pub fn growth(g: &Game, u: f64, t: f64) -> Result<f64> {
    log_growth(g, u, t).map(f64::exp)
}

/// Derivative of [`log_growth`] in `t`: `sum w (a - u) / (a t - u t + u)`.
///
/// Returns `-inf` when `t = 1` and the game has a zero payoff.
pub fn marginal(g: &Game, u: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for atom in g.atoms() {
        let denom = atom.payoff * t + u * (1.0 - t);
        let num = atom.payoff - u;
        if denom <= 0.0 {
            if num < 0.0 {
                return f64::NEG_INFINITY;
            }
            continue;
        }
        acc += atom.weight * num / denom;
    }
    acc
}

fn t_ceiling(g: &Game, cfg: &SolverConfig) -> f64 {
    if g.has_zero_payoff() {
        1.0 - cfg.t_ceiling_margin
    } else {
        1.0
    }
}

/// Maximizer of `G_u` over `[0, ceiling]`, clamped to the ends when the marginal
/// does not change sign.
fn proportion_clamped(g: &Game, u: f64, cfg: &SolverConfig) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = t_ceiling(g, cfg);
    if marginal(g, u, lo) <= 0.0 {
        return Ok(0.0);
    }
    if marginal(g, u, hi) >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..cfg.max_iter.max(200) {
        let mid = 0.5 * (lo + hi);
        let m = marginal(g, u, mid);
        if m == 0.0 {
            return Ok(mid);
        }
        if m > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = hi - lo;
        if (width <= cfg.inner_tol && m.abs() <= cfg.inner_tol) || width <= 2.0 * f64::EPSILON {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence {
        what: "optimal proportion",
        iterations: cfg.max_iter.max(200),
    })
}

/// The proportion `t*` maximizing `G_u(t)`, for `u` strictly inside `(h, E)`.
pub fn optimal_proportion(g: &Game, u: f64, cfg: &SolverConfig) -> Result<f64> {
    check_price(u)?;
    let lower = g.harmonic_price();
    let upper = g.expectation();
    if !(u > lower && u < upper) {
        return Err(Error::Bracket { u, lower, upper });
    }
    proportion_clamped(g, u, cfg)
}

/// Best attainable growth at price `u`: `G_u(t*(u))`.
pub fn optimal_growth(g: &Game, u: f64, cfg: &SolverConfig) -> Result<f64> {
    check_price(u)?;
    let t = proportion_clamped(g, u, cfg)?;
    growth(g, u, t)
}

fn outcome(
    g: &Game,
    rate: Rate,
    price: f64,
    proportion: f64,
    regime: Regime,
) -> Result<PricingOutcome> {
    let growth_at_solution = growth(g, price, proportion)?;
    Ok(PricingOutcome {
        price,
        proportion,
        regime,
        growth_at_solution,
        residuals: Residuals {
            growth: growth_at_solution - rate.growth_target(),
            marginal: marginal(g, price, proportion),
        },
    })
}

/// Growth-optimal price and proportion of `g` under `rate`.
pub fn price(g: &Game, rate: Rate, cfg: &SolverConfig) -> Result<PricingOutcome> {
    cfg.validate()?;
    let f = g.geometric_price(rate);
    let h = g.harmonic_price();
    // h = 0 only with a zero payoff; then f = 0 too and the optimal growth
    // diverges as u -> 0, so the price is always interior.
    if h > 0.0 && f <= h {
        return outcome(g, rate, f, 1.0, Regime::FullInvestment);
    }
    interior_price(g, rate, cfg)
}

/// Solves the simultaneous growth and first-order equations without the regime test.
///
/// Fails with [`Error::NoSolution`] when the target growth exceeds the optimal
/// growth at the lower bracket end, which is the case whenever `f < h`.
pub fn interior_price(g: &Game, rate: Rate, cfg: &SolverConfig) -> Result<PricingOutcome> {
    cfg.validate()?;
    let target = rate.growth_target();
    let expectation = g.expectation();
    if !(expectation > 0.0) {
        return Err(Error::input("game: expectation must be positive"));
    }
    let mut lo = g.harmonic_price().max(1e-8 * expectation);
    let mut hi = expectation;

    let at_lo = optimal_growth(g, lo, cfg)?;
    if at_lo < target * (1.0 - cfg.outer_tol) {
        return Err(Error::NoSolution {
            target,
            attainable: at_lo,
        });
    }
    if at_lo <= target {
        // Boundary root: f = h up to tolerance.
        let t = proportion_clamped(g, lo, cfg)?;
        return outcome(g, rate, lo, t, Regime::Interior);
    }

    for _ in 0..cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        let lambda = optimal_growth(g, mid, cfg)?;
        let residual = lambda - target;
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = hi - lo;
        let converged = residual.abs() <= cfg.outer_tol * target && width <= cfg.outer_tol * mid;
        if converged || width <= 4.0 * f64::EPSILON * mid || residual == 0.0 {
            let t = proportion_clamped(g, mid, cfg)?;
            return outcome(g, rate, mid, t, Regime::Interior);
        }
    }
    Err(Error::NonConvergence {
        what: "price bisection",
        iterations: cfg.max_iter,
    })
}

/// Closed-form price of the two-outcome game paying `a` or `b` with probability 1/2.
pub fn two_point_price(a: f64, b: f64, rate: Rate) -> Result<PricingOutcome> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::input(format!(
            "a, b: payoffs must be positive, got ({a}, {b})"
        )));
    }
    let (a, b) = if a < b { (b, a) } else { (a, b) };
    let e = 0.5 * (a + b);
    let root = (a * b).sqrt();
    let er = rate.growth_target();
    let (u, t, regime) = if e <= root * er {
        (root / er, 1.0, Regime::FullInvestment)
    } else {
        let kappa = (1.0 - (-(-2.0 * rate.r()).exp_m1()).sqrt()) / 2.0;
        let u = kappa * a + (1.0 - kappa) * b;
        (u, u * (e - u) / ((a - u) * (u - b)), Regime::Interior)
    };
    let fa = a * t - u * t + u;
    let fb = b * t - u * t + u;
    let growth_at_solution = (fa * fb).sqrt() / u;
    Ok(PricingOutcome {
        price: u,
        proportion: t,
        regime,
        growth_at_solution,
        residuals: Residuals {
            growth: growth_at_solution - er,
            marginal: (a - u) / (2.0 * fa) + (b - u) / (2.0 * fb),
        },
    })
}
