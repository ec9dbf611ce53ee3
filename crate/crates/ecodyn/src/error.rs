//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain invariant was violated (parameter ranges, config contents).
    #[error("validation: {0}")]
    Validation(String),

    /// A config or report file could not be parsed.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// The closed-form coordinates for an interior branch are singular at
    /// this abscissa: the shared denominator is below tolerance.
    #[error("degenerate denominator ({denom:.3e}) in closed-form coordinates at x = {x}")]
    DegenerateDenominator { x: f64, denom: f64 },

    /// The companion-matrix eigenvalue iteration did not converge.
    #[error("root extraction did not converge after {sweeps} QR sweeps")]
    NoConvergence { sweeps: usize },

    /// The eigenvalue solver produced a non-finite value.
    #[error("eigenvalue computation produced a non-finite value")]
    EigenFailure,

    /// An operation specific to one equilibrium family was applied to another.
    #[error("expected an {expected} equilibrium, got {actual}")]
    WrongFamily {
        expected: &'static str,
        actual: String,
    },

    /// A state component dropped below the clamp tolerance: the computed
    /// trajectory left the nonnegative orthant, which the true flow cannot,
    /// so integration accuracy is lost.
    #[error("component {component} fell to {value:.3e} at t = {t}: positivity violated")]
    PositivityViolation {
        component: usize,
        value: f64,
        t: f64,
    },

    /// The adaptive controller pushed the step size below machine feasibility.
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// The integration state became NaN or infinite.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
