//! Command-line front end.
//!
//! Every subcommand writes one document to `--out` or stdout. Failures print a
//! single line to stderr and map to an exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | bad arguments, unreadable or malformed input, domain violation |
//! | 2 | the solver found no solution, did not converge, or the box is infeasible |
//! | 3 | an internal invariant failed |
//!
//! All floating-point numbers in JSON output carry 12 significant digits.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Number, Value};

use crate::error::Error;
use crate::game::{GameSpec, Rate};
use crate::least_squares::{CuttingPlaneConfig, Portfolio};
use crate::mixture::{self, MixtureCurves};
use crate::montecarlo::{self, SimulationSpec, DEFAULT_STEPS};
use crate::options::{demo_compare, PutModel, QuadratureConfig};
use crate::solver::{self, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "gameprice", version, about = "Growth-optimal prices of games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price one game.
    Price {
        #[arg(long, value_name = "FILE")]
        game: PathBuf,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample f, g, h and u along the segment between two games.
    Mixture {
        #[arg(long, value_name = "FILE")]
        game_a: PathBuf,
        #[arg(long, value_name = "FILE")]
        game_b: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Min-norm price vector of a portfolio.
    LeastSquares {
        #[arg(long, value_name = "FILE")]
        portfolio: PathBuf,
        /// Overrides the rate in the portfolio document.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate repeated reinvestment in one game.
    Simulate {
        #[arg(long, value_name = "FILE")]
        game: PathBuf,
        /// Price paid per unit; with --t. Solved from --r when omitted.
        #[arg(long, requires = "t")]
        u: Option<f64>,
        #[arg(long, requires = "u")]
        t: Option<f64>,
        /// Rate for pricing and for the z-score.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        streams: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Growth-optimal versus Black–Scholes price of a European put.
    OptionDemo {
        #[arg(long = "S")]
        spot: f64,
        #[arg(long = "K")]
        strike: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = QuadratureConfig::default().nodes_per_panel)]
        nodes: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().outer_tol)]
    tol_outer: f64,
    #[arg(long, default_value_t = SolverConfig::default().inner_tol)]
    tol_inner: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iter)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let cfg = SolverConfig {
            outer_tol: self.tol_outer,
            inner_tol: self.tol_inner,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// An error together with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Input(_) | Error::Domain(_) => 1,
            Error::Bracket { .. }
            | Error::NoSolution { .. }
            | Error::NonConvergence { .. }
            | Error::Infeasible(_) => 2,
            Error::Invariant(_) | Error::AtMixture { .. } => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                print!("{e}");
            } else {
                let rendered = e.to_string();
                let first = rendered.lines().next().unwrap_or("invalid arguments");
                eprintln!("{}", first.trim_start_matches("error: "));
            }
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.message.replace('\n', " "));
            f.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<GameSpec, Failure> {
    GameSpec::from_json(&read_text(path)?)
        .map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn rate(r: f64) -> Result<Rate, Failure> {
    Ok(Rate::new(r)?)
}

/// Rounds a finite double to 12 significant digits.
pub fn round_sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig12(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_numbers(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| input_failure(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(output: &OutputArgs, doc: Value) -> Result<(), Failure> {
    if output.format != Format::Json {
        return Err(input_failure("format: this subcommand only writes json"));
    }
    let text = serde_json::to_string_pretty(&round_numbers(doc)).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    emit(output, &format!("{text}\n"))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortfolioDoc {
    #[serde(default)]
    rate: Option<f64>,
    games: Vec<GameSpec>,
}

fn execute(command: Command) -> Result<(), Failure> {
    let quadrature = QuadratureConfig::default();
    match command {
        Command::Price {
            game,
            r,
            solver,
            output,
        } => {
            let cfg = solver.config()?;
            let spec = read_spec(&game)?;
            let g = spec.to_game(r, &quadrature)?;
            let horizon_rate = rate(r * spec.horizon())?;
            let outcome = solver::price(&g, horizon_rate, &cfg)?;
            let mut doc = to_value(&outcome);
            doc["rate"] = json!(horizon_rate.r());
            doc["growth_target"] = json!(horizon_rate.growth_target());
            emit_json(&output, doc)
        }
        Command::Mixture {
            game_a,
            game_b,
            r,
            grid,
            solver,
            output,
        } => {
            let cfg = solver.config()?;
            let (sa, sb) = (read_spec(&game_a)?, read_spec(&game_b)?);
            if sa.horizon() != sb.horizon() {
                return Err(input_failure("game-b: horizon differs from game-a"));
            }
            let ga = sa.to_game(r, &quadrature)?;
            let gb = sb.to_game(r, &quadrature)?;
            let curves = mixture::curves(&ga, &gb, rate(r * sa.horizon())?, grid, &cfg)?;
            let reports = concavity_reports(&curves)?;
            match output.format {
                Format::Csv => {
                    emit(&output, &curves.to_csv())?;
                    let doc = round_numbers(json!({ "concavity": reports }));
                    eprintln!("{doc}");
                    Ok(())
                }
                Format::Json => {
                    let doc = json!({
                        "p": curves.grid,
                        "f": curves.f_vals,
                        "g": curves.g_vals,
                        "h": curves.h_vals,
                        "u": curves.u_vals,
                        "regime": curves.regime.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
                        "concavity": reports,
                    });
                    emit_json(&output, doc)
                }
            }
        }
        Command::LeastSquares {
            portfolio,
            r,
            solver,
            output,
        } => {
            let cfg = solver.config()?;
            let text = read_text(&portfolio)?;
            let doc: PortfolioDoc = serde_json::from_str(&text)
                .map_err(|e| input_failure(format!("{}: portfolio: {e}", portfolio.display())))?;
            let r = r
                .or(doc.rate)
                .ok_or_else(|| input_failure("rate: missing from portfolio and no --r given"))?;
            let horizon = doc.games.first().map_or(1.0, GameSpec::horizon);
            if doc.games.iter().any(|s| s.horizon() != horizon) {
                return Err(input_failure("games: all games must share one horizon"));
            }
            let games = doc
                .games
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    s.to_game(r, &quadrature)
                        .map_err(|e| input_failure(format!("games[{i}]: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let port = Portfolio::new(games, rate(r * horizon)?, cfg)?;
            let res = port.least_squares_prices(&CuttingPlaneConfig::default())?;
            let doc = json!({
                "x": res.x.t,
                "norm": res.norm,
                "L": res.certificate_l,
                "iterations": res.iterations,
                "worst_p": res.x.worst_p,
                "adjusted_prices": port.adjusted_prices(&res.x.t),
                "per_game": to_value(&port.per_game()),
            });
            emit_json(&output, doc)
        }
        Command::Simulate {
            game,
            u,
            t,
            r,
            steps,
            seed,
            streams,
            solver,
            output,
        } => {
            let cfg = solver.config()?;
            let spec = read_spec(&game)?;
            let needs_rate = u.is_none() || matches!(spec, GameSpec::LognormalPut { .. });
            let per_year = match r {
                Some(r) => r,
                None if needs_rate => return Err(input_failure("r: required to price the game")),
                None => 0.0,
            };
            let g = spec.to_game(per_year, &quadrature)?;
            let horizon_rate = r.map(|r| rate(r * spec.horizon())).transpose()?;
            let (u, t) = match (u, t, horizon_rate) {
                (Some(u), Some(t), _) => (u, t),
                (_, _, Some(hr)) => {
                    let outcome = solver::price(&g, hr, &cfg)?;
                    (outcome.price, outcome.proportion)
                }
                _ => return Err(input_failure("r: required to price the game")),
            };
            let result = montecarlo::simulate(&SimulationSpec {
                game: g,
                price: u,
                proportion: t,
                steps,
                seed,
                streams,
            })?;
            let z = horizon_rate.and_then(|hr| montecarlo::z_score(&result, hr));
            let doc = json!({
                "u": u,
                "t": t,
                "steps": steps,
                "seed": seed,
                "streams": streams,
                "geometric_mean": result.geometric_mean_growth,
                "mean_log": result.mean_log,
                "stderr_log": result.stderr_log,
                "z_vs": z,
                "stream_means": result.stream_means,
            });
            emit_json(&output, doc)
        }
        Command::OptionDemo {
            spot,
            strike,
            horizon,
            sigma,
            r,
            nodes,
            solver,
            output,
        } => {
            let cfg = solver.config()?;
            let q = QuadratureConfig {
                nodes_per_panel: nodes,
                ..quadrature
            };
            q.validate()?;
            let model = PutModel::new(spot, strike, horizon, sigma, r)?;
            let report = demo_compare(&model, &cfg, &q)?;
            emit_json(&output, to_value(&report))
        }
    }
}

fn concavity_reports(c: &MixtureCurves) -> Result<Vec<mixture::ConcavityReport>, Failure> {
    let mut reports = vec![
        mixture::check_concavity("f", &c.f_vals, &c.grid)?,
        mixture::check_concavity("h", &c.h_vals, &c.grid)?,
        mixture::check_concavity("u", &c.u_vals, &c.grid)?,
    ];
    if let Some(g) = c.g_complete() {
        reports.push(mixture::check_concavity("g", &g, &c.grid)?);
    }
    Ok(reports)
}
