//! Min-norm ("least-squares") price vectors over a portfolio of games.
//!
//! For games `A_1..A_n` on a common distribution with prices `u_i` and
//! discounted expectations `E_i / e^r`, a vector `t ∈ [0,1]^n` induces the
//! adjusted prices `u_i + t_i d_i` with `d_i = E_i / e^r - u_i`. The functional
//!
//! ```text
//! L(t) = max_{p ∈ Q} price(Σ p_i A_i) / Σ p_i (u_i + t_i d_i)
//! ```
//!
//! compares the price of every mixture against the adjusted prices, and the
//! feasible set is `T = { t : L(t) ≤ 1 }`. For fixed `p` the constraint is
//! linear in `t`, so `T` is an intersection of half-spaces and its min-norm
//! point is found by cutting planes: the most violated `p` yields a cut, and a
//! small QP projects the origin onto the accumulated cuts.
//!
//! The maximization over the simplex is a barycentric grid followed by a
//! Nelder–Mead polish. It finds the maximum only up to the grid resolution;
//! there is no global-optimality certificate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::game::{combine, Game, Rate};
use crate::qp::{min_norm_in_box, HalfSpace};
use crate::solver::{self, SolverConfig};

/// `L(t) ≤ 1 + MEMBERSHIP_TOL` counts as feasible.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamePrice {
    pub u: f64,
    #[serde(rename = "E")]
    pub expectation: f64,
    /// Discounted-expectation gap `E / e^r - u`.
    pub d: f64,
}

#[derive(Debug)]
pub struct Portfolio {
    games: Vec<Game>,
    rate: Rate,
    cfg: SolverConfig,
    per_game: Vec<GamePrice>,
    search: SimplexSearch,
    grid_cache: OnceLock<Vec<(Vec<f64>, f64)>>,
}

/// How the maximum over the simplex is searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSearch {
    /// Barycentric subdivisions; `None` picks 64 for n ≤ 3, 16 for n ≤ 6, 8 beyond.
    pub subdivisions: Option<usize>,
    pub refine_iterations: usize,
}

impl Default for SimplexSearch {
    fn default() -> Self {
        SimplexSearch {
            subdivisions: None,
            refine_iterations: 200,
        }
    }
}

impl SimplexSearch {
    fn subdivisions_for(&self, n: usize) -> usize {
        self.subdivisions.unwrap_or(match n {
            0..=3 => 64,
            4..=6 => 16,
            _ => 8,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceVector {
    pub t: Vec<f64>,
    pub l_value: f64,
    pub worst_p: Vec<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormResult {
    pub x: PriceVector,
    pub norm: f64,
    pub certificate_l: f64,
    /// Number of `L` evaluations, one per cutting-plane round.
    pub iterations: usize,
    pub cuts: Vec<Vec<f64>>,
    /// Norm of the QP solution after each cut.
    pub subproblem_norms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuttingPlaneConfig {
    /// Stop once `L(x) ≤ 1 + tol`.
    pub tol: f64,
    pub max_cuts: usize,
}

impl Default for CuttingPlaneConfig {
    fn default() -> Self {
        CuttingPlaneConfig {
            tol: 1e-6,
            max_cuts: 100,
        }
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut p: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// All points `k / m` of the simplex in `n` coordinates.
pub fn simplex_grid(n: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / m as f64).collect());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n, left - k, m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, m, m, &mut Vec::with_capacity(n), &mut out);
    out
}

impl Portfolio {
    /// Prices every game and checks the shared distribution.
    pub fn new(games: Vec<Game>, rate: Rate, cfg: SolverConfig) -> Result<Self> {
        if games.is_empty() {
            return Err(Error::input("games: portfolio needs at least one game"));
        }
        for (i, g) in games.iter().enumerate().skip(1) {
            if !games[0].shares_distribution(g) {
                return Err(Error::input(format!(
                    "games[{i}]: distribution differs from games[0]"
                )));
            }
        }
        cfg.validate()?;
        let per_game = games
            .par_iter()
            .map(|g| {
                let u = solver::price(g, rate, &cfg)?.price;
                let expectation = g.expectation();
                Ok(GamePrice {
                    u,
                    expectation,
                    d: expectation / rate.growth_target() - u,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, gp) in per_game.iter().enumerate() {
            let tol = 1e-9 * gp.expectation.max(1.0);
            if !(gp.u > 0.0) || gp.d < -tol {
                return Err(Error::Invariant(format!(
                    "games[{i}]: price {} exceeds discounted expectation by {}",
                    gp.u, -gp.d
                )));
            }
        }
        Ok(Portfolio {
            games,
            rate,
            cfg,
            per_game,
            search: SimplexSearch::default(),
            grid_cache: OnceLock::new(),
        })
    }

    pub fn with_search(mut self, search: SimplexSearch) -> Self {
        self.search = search;
        self.grid_cache = OnceLock::new();
        self
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    pub fn games(&self) -> &[Game] {
        &self.games
    }

    pub fn rate(&self) -> Rate {
        self.rate
    }

    pub fn per_game(&self) -> &[GamePrice] {
        &self.per_game
    }

    fn check_simplex(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.len() {
            return Err(Error::input(format!(
                "p: expected {} weights, got {}",
                self.len(),
                p.len()
            )));
        }
        let total: f64 = p.iter().sum();
        if p.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::input("p: not a point of the simplex"));
        }
        Ok(())
    }

    fn check_box(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.len() {
            return Err(Error::input(format!(
                "t: expected {} entries, got {}",
                self.len(),
                t.len()
            )));
        }
        if t.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::input("t: entries must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Price of the mixture `Σ p_i A_i`. A vertex returns the stored game price.
    pub fn price_of_mixture(&self, p: &[f64]) -> Result<f64> {
        self.check_simplex(p)?;
        if let Some(j) = p.iter().position(|&x| x == 1.0) {
            return Ok(self.per_game[j].u);
        }
        let refs: Vec<&Game> = self.games.iter().collect();
        let game = combine(&refs, p)?;
        Ok(solver::price(&game, self.rate, &self.cfg)?.price)
    }

    fn adjusted(&self, p: &[f64], t: &[f64]) -> f64 {
        p.iter()
            .zip(&self.per_game)
            .zip(t)
            .map(|((pi, gp), ti)| pi * (gp.u + ti * gp.d))
            .sum()
    }

    fn grid_prices(&self) -> Result<&Vec<(Vec<f64>, f64)>> {
        if let Some(cached) = self.grid_cache.get() {
            return Ok(cached);
        }
        let m = self.search.subdivisions_for(self.len());
        let points = simplex_grid(self.len(), m);
        let priced = points
            .into_par_iter()
            .map(|p| {
                let price = self.price_of_mixture(&p)?;
                Ok((p, price))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.grid_cache.get_or_init(|| priced))
    }

    /// `L(t)` and a maximizing point of the simplex.
    pub fn l_value(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_box(t)?;
        let n = self.len();
        if n == 1 {
            let gp = self.per_game[0];
            return Ok((gp.u / (gp.u + t[0] * gp.d), vec![1.0]));
        }
        let mut best_ratio = f64::NEG_INFINITY;
        let mut best_p = Vec::new();
        for (p, price) in self.grid_prices()? {
            let ratio = price / self.adjusted(p, t);
            if ratio > best_ratio {
                best_ratio = ratio;
                best_p = p.clone();
            }
        }
        let (ratio, p) = self.refine(t, best_p, best_ratio)?;
        Ok((ratio, p))
    }

    fn ratio_at(&self, t: &[f64], coords: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut full = coords.to_vec();
        full.push(1.0 - coords.iter().sum::<f64>());
        let p = project_to_simplex(&full);
        let ratio = self.price_of_mixture(&p)? / self.adjusted(&p, t);
        Ok((ratio, p))
    }

    /// Nelder–Mead ascent on the first `n - 1` barycentric coordinates.
    fn refine(&self, t: &[f64], start: Vec<f64>, start_ratio: f64) -> Result<(f64, Vec<f64>)> {
        let n = self.len();
        let dim = n - 1;
        let h = 1.0 / self.search.subdivisions_for(n) as f64;
        let mut best = (start_ratio, start.clone());

        // Vertices carry their projected simplex point; objective is -ratio.
        let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let base: Vec<f64> = start[..dim].to_vec();
        vertices.push((base.clone(), -start_ratio));
        for k in 0..dim {
            let mut v = base.clone();
            v[k] += if base[k] + h <= 1.0 { h } else { -h };
            let (ratio, p) = self.ratio_at(t, &v)?;
            if ratio > best.0 {
                best = (ratio, p);
            }
            vertices.push((v, -ratio));
        }

        let eval = |x: &[f64], best: &mut (f64, Vec<f64>)| -> Result<f64> {
            let (ratio, p) = self.ratio_at(t, x)?;
            if ratio > best.0 {
                *best = (ratio, p);
            }
            Ok(-ratio)
        };

        for _ in 0..self.search.refine_iterations {
            vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = vertices[dim].1 - vertices[0].1;
            if spread.abs() <= 1e-15 {
                let size = vertices
                    .iter()
                    .flat_map(|(v, _)| v.iter().zip(&vertices[0].0).map(|(a, b)| (a - b).abs()))
                    .fold(0.0f64, f64::max);
                if size <= 1e-12 {
                    break;
                }
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|k| vertices[..dim].iter().map(|(v, _)| v[k]).sum::<f64>() / dim as f64)
                .collect();
            let worst = vertices[dim].clone();
            let along = |c: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(ce, w)| ce + c * (ce - w))
                    .collect()
            };
            let reflected = along(1.0);
            let fr = eval(&reflected, &mut best)?;
            if fr < vertices[0].1 {
                let expanded = along(2.0);
                let fe = eval(&expanded, &mut best)?;
                vertices[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else if fr < vertices[dim - 1].1 {
                vertices[dim] = (reflected, fr);
            } else {
                let contracted = if fr < worst.1 {
                    along(0.5)
                } else {
                    along(-0.5)
                };
                let fc = eval(&contracted, &mut best)?;
                if fc < worst.1.min(fr) {
                    vertices[dim] = (contracted, fc);
                } else {
                    let anchor = vertices[0].0.clone();
                    for vertex in vertices.iter_mut().skip(1) {
                        let shrunk: Vec<f64> = anchor
                            .iter()
                            .zip(&vertex.0)
                            .map(|(a, v)| a + 0.5 * (v - a))
                            .collect();
                        let fs = eval(&shrunk, &mut best)?;
                        *vertex = (shrunk, fs);
                    }
                }
            }
        }
        Ok(best)
    }

    pub fn price_vector(&self, t: &[f64]) -> Result<PriceVector> {
        let (l_value, worst_p) = self.l_value(t)?;
        Ok(PriceVector {
            t: t.to_vec(),
            l_value,
            worst_p,
            feasible: l_value <= 1.0 + MEMBERSHIP_TOL,
        })
    }

    /// Whether `t` lies in the feasible set `T`.
    pub fn membership(&self, t: &[f64]) -> Result<bool> {
        Ok(self.price_vector(t)?.feasible)
    }

    /// Adjusted prices `u_i + x_i d_i` induced by a price vector.
    pub fn adjusted_prices(&self, x: &[f64]) -> Vec<f64> {
        self.per_game
            .iter()
            .zip(x)
            .map(|(gp, xi)| gp.u + xi * gp.d)
            .collect()
    }

    /// The cut `Σ p_i d_i x_i ≥ price(Σ p_i A_i) - Σ p_i u_i` at a simplex point.
    pub fn cut_at(&self, p: &[f64]) -> Result<HalfSpace> {
        let price = self.price_of_mixture(p)?;
        let normal: Vec<f64> = p
            .iter()
            .zip(&self.per_game)
            .map(|(pi, gp)| pi * gp.d)
            .collect();
        let base: f64 = p.iter().zip(&self.per_game).map(|(pi, gp)| pi * gp.u).sum();
        Ok(HalfSpace::new(normal, price - base))
    }

    /// Minimum-norm point of `T` by cutting planes.
    pub fn least_squares_prices(&self, cp: &CuttingPlaneConfig) -> Result<MinNormResult> {
        let n = self.len();
        let mut x = vec![0.0; n];
        let mut cut_points: Vec<Vec<f64>> = Vec::new();
        let mut cuts: Vec<HalfSpace> = Vec::new();
        let mut subproblem_norms = Vec::new();
        let mut iterations = 0;
        loop {
            let (l, worst_p) = self.l_value(&x)?;
            iterations += 1;
            if l <= 1.0 + cp.tol {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                return Ok(MinNormResult {
                    x: PriceVector {
                        t: x,
                        l_value: l,
                        worst_p,
                        feasible: l <= 1.0 + MEMBERSHIP_TOL,
                    },
                    norm,
                    certificate_l: l,
                    iterations,
                    cuts: cut_points,
                    subproblem_norms,
                });
            }
            if cuts.len() >= cp.max_cuts {
                return Err(Error::NonConvergence {
                    what: "cutting planes",
                    iterations: cuts.len(),
                });
            }
            cuts.push(self.cut_at(&worst_p)?);
            cut_points.push(worst_p);
            let sol = min_norm_in_box(n, &cuts)?;
            subproblem_norms.push(sol.norm);
            x = sol.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        }
    }
}
