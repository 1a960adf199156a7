//! European put under a lognormal terminal price, as a game.
//!
//! The log-return `x` over the horizon is normal with mean `-σ²T/2` and variance
//! `σ²T`; the terminal price is `S e^{rT} e^x` and the put pays
//! `max(K - S e^{rT} e^x, 0)`. The closed-form expectation and the
//! Black–Scholes price serve as oracles for the quadrature game.

use libm::erfc;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::game::{Atom, Game, Rate};
use crate::quadrature;
use crate::solver::{self, PricingOutcome, SolverConfig};

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn norm_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PutModel {
    pub spot: f64,
    pub strike: f64,
    /// Years to exercise.
    pub horizon: f64,
    /// Volatility per square-root year.
    pub sigma: f64,
    /// Continuously compounded rate per year.
    pub rate: f64,
}

impl PutModel {
    pub fn new(spot: f64, strike: f64, horizon: f64, sigma: f64, rate: f64) -> Result<Self> {
        for (name, v) in [
            ("S", spot),
            ("K", strike),
            ("T", horizon),
            ("sigma", sigma),
            ("r", rate),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name}: must be positive, got {v}")));
            }
        }
        Ok(PutModel {
            spot,
            strike,
            horizon,
            sigma,
            rate,
        })
    }

    fn vol(&self) -> f64 {
        self.sigma * self.horizon.sqrt()
    }

    /// `(d1, d2)` with `d2 = (log(S/K) + (r - σ²/2)T) / (σ√T)` and `d1 = d2 + σ√T`.
    fn d1_d2(&self) -> (f64, f64) {
        let vol = self.vol();
        let d2 = ((self.spot / self.strike).ln()
            + (self.rate - 0.5 * self.sigma * self.sigma) * self.horizon)
            / vol;
        (d2 + vol, d2)
    }

    /// Growth target of the whole horizon, `e^{rT}`.
    pub fn horizon_rate(&self) -> Result<Rate> {
        Rate::new(self.rate * self.horizon)
    }

    /// Log-return at which the payoff reaches zero: `log(K/S) - rT`.
    pub fn kink(&self) -> f64 {
        (self.strike / self.spot).ln() - self.rate * self.horizon
    }

    fn payoff(&self, x: f64) -> f64 {
        (self.strike - self.spot * (self.rate * self.horizon + x).exp()).max(0.0)
    }
}

/// Undiscounted expected put payoff, `K N(-d2) - S e^{rT} N(-d1)`.
pub fn put_expectation(m: &PutModel) -> f64 {
    let (d1, d2) = m.d1_d2();
    m.strike * norm_cdf(-d2) - m.spot * (m.rate * m.horizon).exp() * norm_cdf(-d1)
}

/// Black–Scholes put price, `K e^{-rT} N(-d2) - S N(-d1)`.
pub fn black_scholes_put(m: &PutModel) -> f64 {
    let (d1, d2) = m.d1_d2();
    m.strike * (-m.rate * m.horizon).exp() * norm_cdf(-d2) - m.spot * norm_cdf(-d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub nodes_per_panel: usize,
    /// Truncation half-width in standard deviations of the log-return.
    pub half_width_sigmas: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes_per_panel: 64,
            half_width_sigmas: 10.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 8 {
            return Err(Error::input(format!(
                "nodes_per_panel: must be at least 8, got {}",
                self.nodes_per_panel
            )));
        }
        if !(self.half_width_sigmas > 0.0) || !self.half_width_sigmas.is_finite() {
            return Err(Error::input("half_width_sigmas: must be positive"));
        }
        Ok(())
    }
}

/// Reduces the put to weighted atoms.
///
/// Two Gauss–Legendre panels meet at the payoff kink so each integrand is
/// smooth. Upper-panel atoms pay exactly zero. Mass outside `±half_width`
/// standard deviations is dropped and the weights renormalized.
pub fn build_put_game(m: &PutModel, q: &QuadratureConfig) -> Result<Game> {
    q.validate()?;
    let sd = m.vol();
    let mean = -0.5 * sd * sd;
    let half = q.half_width_sigmas * sd;
    let (lo, hi) = (mean - half, mean + half);
    let kink = m.kink();
    if kink <= lo {
        return Err(Error::input(
            "K: put is out of the money on the whole truncated support",
        ));
    }
    let mut atoms = Vec::with_capacity(2 * q.nodes_per_panel);
    let split = kink.min(hi);
    for (x, w) in quadrature::panel(q.nodes_per_panel, lo, split) {
        atoms.push(Atom::new(m.payoff(x), w * norm_pdf(x, mean, sd)));
    }
    if kink < hi {
        for (x, w) in quadrature::panel(q.nodes_per_panel, kink, hi) {
            atoms.push(Atom::new(0.0, w * norm_pdf(x, mean, sd)));
        }
    }
    // Far-tail nodes can underflow to zero density; they carry no mass.
    atoms.retain(|a| a.weight > 0.0);
    let game = Game::from_unnormalized(atoms)?;
    Ok(game.with_label(format!(
        "put S={} K={} T={} sigma={} r={}",
        m.spot, m.strike, m.horizon, m.sigma, m.rate
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthOptimalBlock {
    pub price: f64,
    pub proportion: f64,
    pub growth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackScholesBlock {
    pub price: f64,
    /// Optimal reinvestment proportion when paying the Black–Scholes price.
    pub proportion: f64,
    /// Growth achieved at that price and proportion.
    pub growth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model: PutModel,
    pub expectation_closed_form: f64,
    pub expectation_quadrature: f64,
    pub growth_target: f64,
    pub growth_optimal: GrowthOptimalBlock,
    pub black_scholes: BlackScholesBlock,
    /// Growth-optimal price is lower and its growth higher than at the Black–Scholes price.
    pub ordering_holds: bool,
}

/// Prices the put for growth `e^{rT}` and compares with paying the Black–Scholes price.
pub fn demo_compare(
    m: &PutModel,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<ComparisonReport> {
    let game = build_put_game(m, q)?;
    let rate = m.horizon_rate()?;
    let optimal: PricingOutcome = solver::price(&game, rate, cfg)?;
    let bs_price = black_scholes_put(m);
    let bs_t = solver::optimal_proportion(&game, bs_price, cfg)?;
    let bs_growth = solver::growth(&game, bs_price, bs_t)?;
    let growth_optimal = GrowthOptimalBlock {
        price: optimal.price,
        proportion: optimal.proportion,
        growth: optimal.growth_at_solution,
    };
    Ok(ComparisonReport {
        model: *m,
        expectation_closed_form: put_expectation(m),
        expectation_quadrature: game.expectation(),
        growth_target: rate.growth_target(),
        growth_optimal,
        black_scholes: BlackScholesBlock {
            price: bs_price,
            proportion: bs_t,
            growth: bs_growth,
        },
        ordering_holds: growth_optimal.price < bs_price && growth_optimal.growth > bs_growth,
    })
}
