//! Growth-optimal pricing of games.
//!
//! A game is a nonnegative payoff over a probability distribution. Its price
//! under a rate `r` is the stake at which an investor who reinvests the optimal
//! proportion of capital each round grows wealth at exactly `e^r` per round.
//! On top of the single-game solver this crate provides mixture price curves,
//! min-norm price vectors over portfolios, Monte Carlo verification of growth
//! rates, and the European put as a worked example.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod game;
pub mod least_squares;
pub mod mixture;
pub mod montecarlo;
pub mod options;
pub mod qp;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use game::{Atom, Game, GameSpec, Rate};
pub use solver::{PricingOutcome, Regime, SolverConfig};
