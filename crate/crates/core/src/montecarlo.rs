//! Monte Carlo check of growth rates under fractional reinvestment.
//!
//! Each step draws an atom by weight and multiplies wealth by
//! `1 + t (payoff / u - 1)`. Logs are accumulated instead of wealth.
//!
//! Steps are cut into fixed chunks of [`CHUNK_STEPS`]; chunk `c` draws from
//! ChaCha8 stream `c` under the user seed. A worker only counts how often each
//! atom was drawn, and the log-sum is formed once from the merged counts. The
//! result is therefore bit-identical for any number of streams or threads;
//! `streams` only sets the degree of parallelism and the per-stream report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, Rate};
use crate::solver::{self, SolverConfig};

pub const CHUNK_STEPS: u64 = 4096;
pub const DEFAULT_STEPS: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub game: Game,
    pub price: f64,
    pub proportion: f64,
    pub steps: u64,
    pub seed: u64,
    pub streams: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub geometric_mean_growth: f64,
    pub mean_log: f64,
    pub stderr_log: f64,
    pub stream_means: Vec<f64>,
    pub steps: u64,
}

impl SimulationSpec {
    fn log_factors(&self) -> Result<Vec<f64>> {
        if !(self.price > 0.0) || !self.price.is_finite() {
            return Err(Error::input(format!(
                "u: must be positive, got {}",
                self.price
            )));
        }
        if !(0.0..=1.0).contains(&self.proportion) {
            return Err(Error::input(format!(
                "t: must lie in [0, 1], got {}",
                self.proportion
            )));
        }
        if self.steps == 0 {
            return Err(Error::input("steps: must be at least 1"));
        }
        if self.streams == 0 {
            return Err(Error::input("streams: must be at least 1"));
        }
        self.game
            .atoms()
            .iter()
            .map(|a| {
                let excess = self.proportion * (a.payoff / self.price - 1.0);
                if excess <= -1.0 {
                    Err(Error::Domain(format!(
                        "wealth factor {} at payoff {} is not positive",
                        1.0 + excess,
                        a.payoff
                    )))
                } else {
                    Ok(excess.ln_1p())
                }
            })
            .collect()
    }
}

fn draw_counts(cumulative: &[f64], seed: u64, chunk: u64, steps: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts = vec![0u64; cumulative.len()];
    let last = cumulative.len() - 1;
    for _ in 0..steps {
        let x: f64 = rng.random();
        let j = cumulative.partition_point(|&c| c <= x).min(last);
        counts[j] += 1;
    }
    counts
}

fn weighted_log(counts: &[u64], logs: &[f64]) -> f64 {
    counts.iter().zip(logs).map(|(&c, &l)| c as f64 * l).sum()
}

pub fn simulate(spec: &SimulationSpec) -> Result<SimulationResult> {
    let logs = spec.log_factors()?;
    let mut cumulative = Vec::with_capacity(logs.len());
    let mut acc = 0.0;
    for a in spec.game.atoms() {
        acc += a.weight;
        cumulative.push(acc);
    }

    let chunks = spec.steps.div_ceil(CHUNK_STEPS);
    let chunk_len = |c: u64| CHUNK_STEPS.min(spec.steps - c * CHUNK_STEPS);
    let streams = spec.streams as u64;
    let per_stream: Vec<(Vec<u64>, u64)> = (0..streams)
        .into_par_iter()
        .map(|k| {
            let mut counts = vec![0u64; logs.len()];
            let mut steps = 0;
            let mut c = k;
            while c < chunks {
                let len = chunk_len(c);
                for (total, n) in counts
                    .iter_mut()
                    .zip(draw_counts(&cumulative, spec.seed, c, len))
                {
                    *total += n;
                }
                steps += len;
                c += streams;
            }
            (counts, steps)
        })
        .collect();

    let mut counts = vec![0u64; logs.len()];
    for (stream_counts, _) in &per_stream {
        for (total, n) in counts.iter_mut().zip(stream_counts) {
            *total += n;
        }
    }
    let n = spec.steps as f64;
    let mean_log = weighted_log(&counts, &logs) / n;
    let variance = if spec.steps > 1 {
        counts
            .iter()
            .zip(&logs)
            .map(|(&c, &l)| c as f64 * (l - mean_log).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let stream_means = per_stream
        .iter()
        .filter(|(_, steps)| *steps > 0)
        .map(|(c, steps)| weighted_log(c, &logs) / *steps as f64)
        .collect();
    Ok(SimulationResult {
        geometric_mean_growth: mean_log.exp(),
        mean_log,
        stderr_log: (variance / n).sqrt(),
        stream_means,
        steps: spec.steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub steps: u64,
    pub seed: u64,
    pub streams: usize,
    pub solver: SolverConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            steps: DEFAULT_STEPS,
            seed: 0,
            streams: 1,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub price: f64,
    pub proportion: f64,
    pub theoretical_growth: f64,
    pub simulated_growth: f64,
    pub mean_log: f64,
    pub stderr_log: f64,
    /// `(mean_log - r) / stderr_log`; absent when the log factor never varies.
    pub z_score: Option<f64>,
}

/// `(mean_log - r) / stderr`, or `None` when the standard error is zero.
pub fn z_score(result: &SimulationResult, rate: Rate) -> Option<f64> {
    (result.stderr_log > 0.0).then(|| (result.mean_log - rate.r()) / result.stderr_log)
}

/// Prices the game, then simulates at the solved `(u, t)`.
pub fn verify_price(game: &Game, rate: Rate, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let outcome = solver::price(game, rate, &cfg.solver)?;
    let result = simulate(&SimulationSpec {
        game: game.clone(),
        price: outcome.price,
        proportion: outcome.proportion,
        steps: cfg.steps,
        seed: cfg.seed,
        streams: cfg.streams,
    })?;
    Ok(VerificationReport {
        price: outcome.price,
        proportion: outcome.proportion,
        theoretical_growth: rate.growth_target(),
        simulated_growth: result.geometric_mean_growth,
        mean_log: result.mean_log,
        stderr_log: result.stderr_log,
        z_score: z_score(&result, rate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(game: Game, price: f64, proportion: f64, steps: u64, streams: usize) -> SimulationSpec {
        SimulationSpec {
            game,
            price,
            proportion,
            steps,
            seed: 42,
            streams,
        }
    }

    #[test]
    fn zero_proportion_never_moves() {
        let g = Game::two_point(19.0, 1.0).unwrap();
        let res = simulate(&spec(g, 7.0, 0.0, 10_000, 3)).unwrap();
        assert_eq!(res.geometric_mean_growth, 1.0);
        assert_eq!(res.stderr_log, 0.0);
    }

    #[test]
    fn constant_game_at_par() {
        let g = Game::constant(3.7).unwrap();
        for t in [0.1, 0.3, 0.77, 1.0] {
            let res = simulate(&spec(g.clone(), 3.7, t, 5_000, 2)).unwrap();
            assert_eq!(res.geometric_mean_growth, 1.0);
        }
    }

    #[test]
    fn streams_do_not_change_the_result() {
        let g = Game::two_point(19.0, 1.0).unwrap();
        let one = simulate(&spec(g.clone(), 7.2, 0.27, 50_001, 1)).unwrap();
        for streams in [2, 5, 8, 64] {
            let other = simulate(&spec(g.clone(), 7.2, 0.27, 50_001, streams)).unwrap();
            assert_eq!(one.mean_log.to_bits(), other.mean_log.to_bits());
            assert_eq!(one.stderr_log.to_bits(), other.stderr_log.to_bits());
            assert_eq!(other.stream_means.len(), streams.min(13));
        }
    }

    #[test]
    fn seed_changes_draws() {
        let g = Game::two_point(19.0, 1.0).unwrap();
        let mut a = spec(g, 7.2, 0.27, 10_000, 1);
        let first = simulate(&a).unwrap();
        a.seed = 43;
        assert_ne!(first.mean_log, simulate(&a).unwrap().mean_log);
    }

    #[test]
    fn two_point_growth_matches_rate() {
        let g = Game::two_point(19.0, 1.0).unwrap();
        let r = Rate::new(0.05).unwrap();
        let rep = verify_price(&g, r, &VerifyConfig::default()).unwrap();
        let z = rep.z_score.unwrap();
        assert!(z.abs() <= 4.0, "z = {z}");
        assert!((rep.simulated_growth - rep.mean_log.exp()).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let g = Game::new(vec![
            crate::game::Atom::new(0.0, 0.5),
            crate::game::Atom::new(4.0, 0.5),
        ])
        .unwrap();
        assert!(matches!(
            simulate(&spec(g.clone(), 1.0, 1.0, 10, 1)),
            Err(Error::Domain(_))
        ));
        assert!(simulate(&spec(g.clone(), 1.0, 0.5, 0, 1)).is_err());
        assert!(simulate(&spec(g.clone(), 1.0, 1.5, 10, 1)).is_err());
        assert!(simulate(&spec(g, 1.0, 0.5, 10, 0)).is_err());
    }
}
