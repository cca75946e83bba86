use thiserror::Error;

/// Errors raised by the solvers in this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step budget of {max_steps} exceeded at r = {r}")]
    StepBudgetExceeded { max_steps: usize, r: f64 },

    #[error("step size underflow at r = {r} (h = {h:e})")]
    StepUnderflow { r: f64, h: f64 },

    #[error("non-finite state at r = {r}")]
    NonFiniteState { r: f64 },

    #[error("no sign change found for the eigenvalue search below lambda = {ceiling}")]
    BracketNotFound { ceiling: f64 },

    #[error("interval [{a}, {b}] is too short")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("point {x} lies outside [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },

    #[error("reflection law has no sign change on [{a}, {b}]")]
    BracketFailure { a: f64, b: f64 },

    #[error("amplitude system is singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("no convergence: {reason} (best residual {best_residual:e}, last iterate {last_iterate:?})")]
    NoConvergence {
        reason: String,
        best_residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("p = {p} does not exceed the second radial eigenvalue {lambda2} on [{a}, {b}]")]
    BelowEigenvalueThreshold { p: f64, lambda2: f64, a: f64, b: f64 },

    #[error("no shooting bracket on [{a}, {b}] for p = {p}")]
    NoBracket { p: f64, a: f64, b: f64, detail: String },

    #[error("every shooting root on [{a}, {b}] fails strict monotonicity")]
    NonMonotoneOnly { a: f64, b: f64 },

    #[error("decreasing solutions need an annulus (a > 0)")]
    BallNotAllowed,

    #[error("window R * eps_p = {extent} exceeds the interval length {length}")]
    WindowExceedsDomain { extent: f64, length: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
