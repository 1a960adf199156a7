//! Games as finite weighted payoff atoms.
//!
//! A game pairs a nonnegative payoff with a probability distribution. Discrete
//! games are stored directly; continuous ones (the lognormal put) are reduced to
//! atoms by quadrature before they reach this type, so every integral over the
//! distribution becomes a finite weighted sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::options::{build_put_game, PutModel, QuadratureConfig};

/// Weight sums within this distance of 1 are renormalized; larger deviations are rejected.
pub const WEIGHT_RENORM_TOL: f64 = 1e-9;

/// Atom-by-atom weight agreement required for two games to share a distribution.
pub const SHARED_DISTRIBUTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub payoff: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(payoff: f64, weight: f64) -> Self {
        Atom { payoff, weight }
    }
}

/// A finite weighted set of payoff atoms.
///
/// Invariants: at least one atom, every payoff finite and nonnegative, at least
/// one payoff positive, every weight positive, weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    atoms: Vec<Atom>,
    label: Option<String>,
}

impl Game {
    /// Validates and normalizes a list of atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::input("atoms: must contain at least one atom"));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if !atom.payoff.is_finite() {
                return Err(Error::input(format!("atoms[{i}].payoff: must be finite")));
            }
            if atom.payoff < 0.0 {
                return Err(Error::input(format!(
                    "atoms[{i}].payoff: negative payoff {}",
                    atom.payoff
                )));
            }
            if !atom.weight.is_finite() || atom.weight <= 0.0 {
                return Err(Error::input(format!(
                    "atoms[{i}].w: weight must be positive and finite, got {}",
                    atom.weight
                )));
            }
        }
        if atoms.iter().all(|a| a.payoff == 0.0) {
            return Err(Error::input("atoms: at least one payoff must be positive"));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_RENORM_TOL {
            return Err(Error::input(format!(
                "atoms: weights sum to {total}, expected 1"
            )));
        }
        let atoms = if total == 1.0 {
            atoms
        } else {
            atoms
                .into_iter()
                .map(|a| Atom::new(a.payoff, a.weight / total))
                .collect()
        };
        Ok(Game { atoms, label: None })
    }

    /// Builds a game from atoms whose weights are only proportional to
    /// probabilities (used by quadrature, where the raw weights carry truncation loss).
    pub fn from_unnormalized(atoms: Vec<Atom>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::input("atoms: zero total weight"));
        }
        Game::new(
            atoms
                .into_iter()
                .map(|a| Atom::new(a.payoff, a.weight / total))
                .collect(),
        )
    }

    /// Two equally likely outcomes `a` and `b`.
    pub fn two_point(a: f64, b: f64) -> Result<Self> {
        Game::new(vec![Atom::new(a, 0.5), Atom::new(b, 0.5)])
    }

    /// A game paying `c` with certainty.
    pub fn constant(c: f64) -> Result<Self> {
        Game::new(vec![Atom::new(c, 1.0)])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The smallest payoff over atoms.
    pub fn min_payoff(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.payoff)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn has_zero_payoff(&self) -> bool {
        self.atoms.iter().any(|a| a.payoff == 0.0)
    }

    pub fn expectation(&self) -> f64 {
        self.atoms.iter().map(|a| a.payoff * a.weight).sum()
    }

    /// `exp(sum w log a)`; zero when some atom pays nothing.
    pub fn geometric_mean(&self) -> f64 {
        if self.has_zero_payoff() {
            return 0.0;
        }
        self.atoms
            .iter()
            .map(|a| a.weight * a.payoff.ln())
            .sum::<f64>()
            .exp()
    }

    /// Geometric mean discounted by the growth target `e^r`.
    pub fn geometric_price(&self, rate: Rate) -> f64 {
        self.geometric_mean() / rate.growth_target()
    }

    /// `1 / sum (w / a)`; zero when some atom pays nothing.
    pub fn harmonic_price(&self) -> f64 {
        if self.has_zero_payoff() {
            return 0.0;
        }
        1.0 / self.atoms.iter().map(|a| a.weight / a.payoff).sum::<f64>()
    }

    /// Multiplies every payoff by `k > 0`.
    pub fn scale(&self, k: f64) -> Result<Game> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::input(format!(
                "k: scale factor must be positive, got {k}"
            )));
        }
        Ok(Game {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.payoff * k, a.weight))
                .collect(),
            label: self.label.clone(),
        })
    }

    /// Whether `other` has the same atom count and weights, i.e. the same underlying distribution.
    pub fn shares_distribution(&self, other: &Game) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(x, y)| (x.weight - y.weight).abs() <= SHARED_DISTRIBUTION_TOL)
    }

    /// Atom-wise payoff `p * a + (1 - p) * b`.
    pub fn mix(&self, other: &Game, p: f64) -> Result<Game> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("p: must lie in [0, 1], got {p}")));
        }
        combine(&[self, other], &[p, 1.0 - p])
    }
}

/// Atom-wise convex combination `sum_i p_i A_i` of games sharing a distribution.
///
/// Weights of the result are taken from the first game.
pub fn combine(games: &[&Game], p: &[f64]) -> Result<Game> {
    let first = games
        .first()
        .ok_or_else(|| Error::input("games: at least one game required"))?;
    if games.len() != p.len() {
        return Err(Error::input(format!(
            "p: expected {} weights, got {}",
            games.len(),
            p.len()
        )));
    }
    if p.iter().any(|&pi| !(0.0..=1.0).contains(&pi)) {
        return Err(Error::input("p: components must lie in [0, 1]"));
    }
    for (i, g) in games.iter().enumerate().skip(1) {
        if !first.shares_distribution(g) {
            return Err(Error::input(format!(
                "games[{i}]: distribution differs from games[0]"
            )));
        }
    }
    let atoms: Vec<Atom> = (0..first.len())
        .map(|k| {
            let payoff = games
                .iter()
                .zip(p)
                .map(|(g, &pi)| pi * g.atoms[k].payoff)
                .sum::<f64>();
            Atom::new(payoff, first.atoms[k].weight)
        })
        .collect();
    if atoms.iter().all(|a| a.payoff == 0.0) {
        return Err(Error::input("p: mixture pays nothing on every atom"));
    }
    Ok(Game { atoms, label: None })
}

/// A continuously compounded rate per unit horizon and its growth target `e^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    r: f64,
    growth_target: f64,
}

impl Rate {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!("r: rate must be positive, got {r}")));
        }
        Ok(Rate {
            r,
            growth_target: r.exp(),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn growth_target(&self) -> f64 {
        self.growth_target
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub payoff: f64,
    pub w: f64,
}

/// A game-spec document as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    TwoPoint {
        a: f64,
        b: f64,
        #[serde(default)]
        label: Option<String>,
    },
    Discrete {
        atoms: Vec<AtomSpec>,
        #[serde(default)]
        label: Option<String>,
    },
    LognormalPut {
        #[serde(rename = "S")]
        spot: f64,
        #[serde(rename = "K")]
        strike: f64,
        #[serde(rename = "T")]
        horizon: f64,
        sigma: f64,
        #[serde(default)]
        label: Option<String>,
    },
}

impl GameSpec {
    /// Parses a game-spec document.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::input(
                "type: missing field `type` (document is empty)",
            ));
        }
        serde_json::from_str(text).map_err(|e| Error::input(format!("game spec: {e}")))
    }

    /// Length of the investment period in units of the rate. Only the put spans
    /// more than one unit; its growth target is `e^{rT}`.
    pub fn horizon(&self) -> f64 {
        match self {
            GameSpec::LognormalPut { horizon, .. } => *horizon,
            _ => 1.0,
        }
    }

    fn label(&self) -> Option<&String> {
        match self {
            GameSpec::TwoPoint { label, .. }
            | GameSpec::Discrete { label, .. }
            | GameSpec::LognormalPut { label, .. } => label.as_ref(),
        }
    }

    /// Builds the game. `r` is the per-year rate, used only by the lognormal put.
    pub fn to_game(&self, r: f64, quadrature: &QuadratureConfig) -> Result<Game> {
        let game = match self {
            GameSpec::TwoPoint { a, b, .. } => {
                for (name, v) in [("a", *a), ("b", *b)] {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::input(format!(
                            "{name}: payoff must be nonnegative, got {v}"
                        )));
                    }
                }
                Game::two_point(*a, *b)?
            }
            GameSpec::Discrete { atoms, .. } => {
                let total: f64 = atoms.iter().map(|a| a.w).sum();
                if atoms.is_empty() {
                    return Err(Error::input("atoms: must contain at least one atom"));
                }
                if !(total > 0.0) {
                    return Err(Error::input("atoms: zero total weight"));
                }
                Game::new(atoms.iter().map(|a| Atom::new(a.payoff, a.w)).collect())?
            }
            GameSpec::LognormalPut {
                spot,
                strike,
                horizon,
                sigma,
                ..
            } => {
                let model = PutModel::new(*spot, *strike, *horizon, *sigma, r)?;
                build_put_game(&model, quadrature)?
            }
        };
        Ok(match self.label() {
            Some(l) => game.with_label(l.clone()),
            None => game,
        })
    }
}

/// Parses a game-spec document and builds the game in one step.
pub fn load_game(text: &str, r: f64, quadrature: &QuadratureConfig) -> Result<Game> {
    GameSpec::from_json(text)?.to_game(r, quadrature)
}
