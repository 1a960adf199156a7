mod common;

use common::*;
use gameprice::game::Game;
use gameprice::least_squares::{CuttingPlaneConfig, Portfolio};
use gameprice::mixture;
use gameprice::solver::SolverConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_game_mixture_price_matches_mixture_curve() {
    let port = interior_pair();
    let games = port.games();
    let c = mixture::curves(
        &games[0],
        &games[1],
        port.rate(),
        41,
        &SolverConfig::default(),
    )
    .unwrap();
    for (p, u) in c.grid.iter().zip(&c.u_vals) {
        let direct = port.price_of_mixture(&[*p, 1.0 - p]).unwrap();
        assert!((direct - u).abs() <= 1e-10 * u, "p = {p}: {direct} vs {u}");
    }
}

#[test]
fn identical_games_price_the_same_everywhere() {
    let g = three_atom_games().remove(0);
    let port = Portfolio::new(
        vec![g.clone(), g.clone(), g],
        rate(0.05),
        SolverConfig::default(),
    )
    .unwrap();
    let u = port.per_game()[0].u;
    for p in [
        [0.2, 0.3, 0.5],
        [1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
        [0.9, 0.05, 0.05],
    ] {
        assert!((port.price_of_mixture(&p).unwrap() - u).abs() <= 1e-12 * u);
    }
}

#[test]
fn example_pair_is_comonotone_and_needs_no_adjustment() {
    let port = example_pair();
    let (l, p) = port.l_value(&[0.0, 0.0]).unwrap();
    assert!(l >= 1.0 - 1e-12);
    assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    let res = port
        .least_squares_prices(&CuttingPlaneConfig::default())
        .unwrap();
    assert_eq!(res.x.t, vec![0.0, 0.0]);
    assert!((res.certificate_l - 1.0).abs() <= 1e-4);
}

#[test]
fn cutting_planes_match_brute_force_on_interior_pair() {
    let port = interior_pair();
    let res = port
        .least_squares_prices(&CuttingPlaneConfig::default())
        .unwrap();
    let (oracle, _) = brute_force_min_norm(&port, 2_000, 1_000);
    assert!(
        inf_distance(&res.x.t, &oracle) <= 2e-3,
        "{:?} vs {oracle:?}",
        res.x.t
    );
    assert!((res.certificate_l - 1.0).abs() <= 1e-4);
    assert!(res.x.t.iter().all(|&v| v > 0.1 && v < 0.9));

    // Each cut is valid: the oracle point satisfies it.
    for p in &res.cuts {
        let cut = port.cut_at(p).unwrap();
        assert!(cut.slack(&oracle) >= -1e-6 * cut.offset.abs().max(1.0));
    }
    // Relaxations shrink, so subproblem norms never decrease.
    for w in res.subproblem_norms.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{:?}", res.subproblem_norms);
    }
    // Shrinking the solution leaves T.
    let shrunk: Vec<f64> = res.x.t.iter().map(|v| 0.9 * v).collect();
    assert!(!port.membership(&shrunk).unwrap());
}

#[test]
fn three_game_certificate_and_feasibility() {
    let port = interior_triple();
    let res = port
        .least_squares_prices(&CuttingPlaneConfig::default())
        .unwrap();
    assert!((res.certificate_l - 1.0).abs() <= 1e-4);
    assert!(port.membership(&[1.0, 1.0, 1.0]).unwrap());
    let adjusted = port.adjusted_prices(&res.x.t);
    for (a, gp) in adjusted.iter().zip(port.per_game()) {
        assert!(*a >= gp.u && *a <= gp.expectation / port.rate().growth_target() + 1e-12);
    }
}

#[test]
fn feasible_set_is_convex() {
    let port = interior_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut feasible = Vec::new();
    while feasible.len() < 12 {
        let t = vec![rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)];
        if port.l_value(&t).unwrap().0 <= 1.0 {
            feasible.push(t);
        }
    }
    for _ in 0..20 {
        let a = &feasible[rng.random_range(0..feasible.len())];
        let b = &feasible[rng.random_range(0..feasible.len())];
        let lambda: f64 = rng.random();
        let mix: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        assert!(port.membership(&mix).unwrap(), "{mix:?}");
    }
}

#[test]
fn mismatched_portfolio_rejected() {
    let games = vec![
        Game::two_point(19.0, 1.0).unwrap(),
        three_atom_games().remove(1),
    ];
    assert!(Portfolio::new(games, rate(0.05), SolverConfig::default()).is_err());
}
