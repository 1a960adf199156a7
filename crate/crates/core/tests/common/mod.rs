#![allow(dead_code)]

use gameprice::game::{Atom, Game, Rate};
use gameprice::least_squares::{Portfolio, MEMBERSHIP_TOL};
use gameprice::solver::SolverConfig;
use rayon::prelude::*;

pub fn rate(r: f64) -> Rate {
    Rate::new(r).unwrap()
}

pub fn discrete(payoffs: &[f64], weights: &[f64]) -> Game {
    Game::new(
        payoffs
            .iter()
            .zip(weights)
            .map(|(&a, &w)| Atom::new(a, w))
            .collect(),
    )
    .unwrap()
}

/// The two-game example pair: comonotone, so the mixture price is affine in p.
pub fn example_pair() -> Portfolio {
    Portfolio::new(
        vec![
            Game::two_point(19.0, 1.0).unwrap(),
            Game::two_point(10.0, 4.0).unwrap(),
        ],
        rate(0.05),
        SolverConfig::default(),
    )
    .unwrap()
}

const W3: [f64; 3] = [0.3, 0.3, 0.4];

pub fn three_atom_games() -> Vec<Game> {
    vec![
        discrete(&[19.0, 1.0, 8.0], &W3),
        discrete(&[10.0, 14.0, 2.0], &W3),
        discrete(&[15.0, 4.0, 6.0], &W3),
    ]
}

/// A pair whose min-norm vector lies strictly inside the box.
pub fn interior_pair() -> Portfolio {
    let games = three_atom_games().into_iter().take(2).collect();
    Portfolio::new(games, rate(0.05), SolverConfig::default()).unwrap()
}

pub fn interior_triple() -> Portfolio {
    Portfolio::new(three_atom_games(), rate(0.05), SolverConfig::default()).unwrap()
}

/// Exhaustive min-norm point of `T` for two games.
///
/// Mixture prices on a p-grid of step `1 / p_steps`; for each column `x1 = i / x_steps`
/// the smallest `x2` meeting every sampled constraint at `L ≤ 1 + 1e-8`. `x2` is
/// not snapped to the grid: near a flat boundary snapping moves the argmin by
/// far more than the grid step.
pub fn brute_force_min_norm(port: &Portfolio, p_steps: usize, x_steps: usize) -> (Vec<f64>, f64) {
    assert_eq!(port.len(), 2);
    let gp = port.per_game();
    let (ua, da, ub, db) = (gp[0].u, gp[0].d, gp[1].u, gp[1].d);
    let prices: Vec<(f64, f64)> = (0..=p_steps)
        .into_par_iter()
        .map(|k| {
            let p = k as f64 / p_steps as f64;
            (p, port.price_of_mixture(&[p, 1.0 - p]).unwrap())
        })
        .collect();
    let scale = x_steps as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for i in 0..=x_steps {
        let x1 = i as f64 / scale;
        let mut x2_min: f64 = 0.0;
        let mut feasible = true;
        for &(p, price) in &prices {
            let need = price / (1.0 + MEMBERSHIP_TOL) - p * (ua + x1 * da) - (1.0 - p) * ub;
            if need <= 0.0 {
                continue;
            }
            let coeff = (1.0 - p) * db;
            if coeff <= 0.0 {
                feasible = false;
                break;
            }
            x2_min = x2_min.max(need / coeff);
        }
        if !feasible || x2_min > 1.0 + 1e-12 {
            continue;
        }
        let x2 = x2_min.min(1.0);
        let norm = (x1 * x1 + x2 * x2).sqrt();
        if best.as_ref().is_none_or(|(_, n)| norm < *n) {
            best = Some((vec![x1, x2], norm));
        }
    }
    best.expect("all-ones column is feasible")
}

pub fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
