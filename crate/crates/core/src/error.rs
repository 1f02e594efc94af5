use thiserror::Error;

use crate::dsl::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("φ is not positive at s = {s} (φ(s) = {value})")]
    NonPositivePhi { s: f64, value: f64 },
    #[error("(sφ(s))' is not positive at s = {s} (value {slope})")]
    NonMonotone { s: f64, slope: f64 },
    #[error("(sφ(s))'/s^{r} varies by a factor {spread:.3e} on (0, s0)")]
    ExponentMismatch { r: f64, spread: f64 },
    #[error("adaptive quadrature did not reach tolerance on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("no sign change bracketing target {target} after {expansions} expansions")]
    BracketFailure { target: f64, expansions: usize },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
    #[error("linear solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Configuration and parse problems, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Config(_) | Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
