mod common;

use common::rate;
use gameprice::game::Game;
use gameprice::mixture::{self, check_concavity, equivalence_points, max_adjacent_jump};
use gameprice::solver::{self, Regime, SolverConfig};

/// A pair whose mixture switches regime twice on [0, 1].
fn crossing_pair() -> (Game, Game) {
    (
        Game::two_point(19.0, 1.0).unwrap(),
        Game::two_point(3.0, 12.0).unwrap(),
    )
}

#[test]
fn regime_flips_and_curves_meet_at_roots() {
    let (a, b) = crossing_pair();
    let c = mixture::curves(&a, &b, rate(0.05), 101, &SolverConfig::default()).unwrap();
    assert!(c.regime.contains(&Regime::Interior));
    assert!(c.regime.contains(&Regime::FullInvestment));
    let roots = equivalence_points(&c, 1e-8).unwrap();
    assert_eq!(roots.len(), 2, "{roots:?}");
    for p in roots {
        let k = c.grid.iter().position(|&q| q == p).unwrap();
        let g = c.g_vals[k].unwrap();
        assert!((c.f_vals[k] - g).abs() <= 1e-7);
        assert!((g - c.h_vals[k]).abs() <= 1e-7);
    }
}

#[test]
fn u_is_max_of_f_and_g() {
    let (a, b) = crossing_pair();
    let c = mixture::curves(&a, &b, rate(0.05), 51, &SolverConfig::default()).unwrap();
    for k in 0..c.len() {
        if let Some(g) = c.g_vals[k] {
            assert!(c.f_vals[k] <= g + 1e-8);
        }
        match c.regime[k] {
            Regime::FullInvestment => assert_eq!(c.u_vals[k], c.f_vals[k]),
            Regime::Interior => assert_eq!(Some(c.u_vals[k]), c.g_vals[k]),
        }
    }
}

#[test]
fn curves_are_concave() {
    let (a, b) = crossing_pair();
    let c = mixture::curves(&a, &b, rate(0.05), 101, &SolverConfig::default()).unwrap();
    for (name, vals) in [("f", &c.f_vals), ("h", &c.h_vals), ("u", &c.u_vals)] {
        let rep = check_concavity(name, vals, &c.grid).unwrap();
        assert!(rep.max_violation <= 1e-7, "{rep:?}");
    }
}

#[test]
fn jumps_halve_under_grid_doubling() {
    let (a, b) = crossing_pair();
    let cfg = SolverConfig::default();
    let mut prev = None;
    for n in [26, 51, 101, 201] {
        let c = mixture::curves(&a, &b, rate(0.05), n, &cfg).unwrap();
        let jump = max_adjacent_jump(&c.u_vals);
        if let Some(p) = prev {
            assert!(jump <= p / 2.0 * 4.0, "{n}: {jump} vs {p}");
        }
        prev = Some(jump);
    }
}

#[test]
fn endpoints_are_pure_prices() {
    let (a, b) = crossing_pair();
    let r = rate(0.05);
    let cfg = SolverConfig::default();
    let c = mixture::curves(&a, &b, r, 11, &cfg).unwrap();
    let last = c.len() - 1;
    let pa = solver::price(&a, r, &cfg).unwrap().price;
    let pb = solver::price(&b, r, &cfg).unwrap().price;
    assert!((c.u_vals[last] - pa).abs() <= 1e-9 * pa);
    assert!((c.u_vals[0] - pb).abs() <= 1e-9 * pb);
}
