use thiserror::Error;

/// Errors raised by game construction, the solvers and the CLI front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input. The message names the offending field.
    #[error("invalid input: {0}")]
    Input(String),

    /// A wealth factor `payoff * t / u - t + 1` is not strictly positive.
    #[error("domain violation: {0}")]
    Domain(String),

    /// `u` lies outside the interior bracket `(harmonic_price, expectation)`.
    #[error("bracket violation: u = {u} not in ({lower}, {upper})")]
    Bracket { u: f64, lower: f64, upper: f64 },

    /// The growth target cannot be reached by any price in the bracket.
    #[error("no solution: target growth {target} exceeds attainable growth {attainable}")]
    NoSolution { target: f64, attainable: f64 },

    #[error("no convergence after {iterations} iterations ({what})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// No point of the box satisfies the accumulated constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An internal consistency check failed; indicates a solver bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Wraps a solver error with the mixture weight at which it occurred.
    #[error("at p = {p}: {source}")]
    AtMixture {
        p: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn at_mixture(self, p: f64) -> Self {
        Error::AtMixture {
            p,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping mixture annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtMixture { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
