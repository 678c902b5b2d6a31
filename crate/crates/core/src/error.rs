//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Variants are deliberately fine-grained so callers (and the CLI's exit-code
/// mapping) can distinguish bad inputs from numeric failures and from model
/// outcomes that have no finite answer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A vector's length does not match the model dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Density-dependent model with `q_m = 0`: the top level drains and mass
    /// accumulates at the bottom, so no stationary profile exists.
    #[error("no stationary solution exists for q_m = 0 (the top level decays to zero density)")]
    NoStationarySolution,

    /// The whole population sits at the bottom level (`f^1 = 1`), which makes
    /// the density-dependent imitation rates undefined.
    #[error("model ill-defined: f^1 = 1 leaves no firms to imitate")]
    IllDefinedModel,

    /// Power iteration did not meet its tolerance within the step budget.
    /// Carries the last iterate so callers can inspect how far it got.
    #[error("power iteration did not converge within {steps} steps (last residual {residual:.3e})")]
    PowerIterationDiverged {
        steps: usize,
        residual: f64,
        last: Vec<f64>,
    },

    /// The dense eigenvalue solver failed to converge.
    #[error("numeric failure: {0}")]
    NumericError(String),

    /// The value-iteration grid is too short: the leapfrog threshold sits at
    /// or below `j_min + 2`, where the forced-leapfrog boundary contaminates
    /// the solution. Re-solve with a lower `j_min`.
    #[error("grid too small: threshold {j0:?} is within 2 levels of j_min = {j_min}; lower j_min")]
    GridTooSmall { j0: Option<i64>, j_min: i64 },

    /// Leapfrogging is unprofitable at every level (`beta * V(m) < C`), so no
    /// finite threshold exists for these parameters.
    #[error("no leapfrog threshold: beta*V(m) - C = {margin:.6e} < 0, jumping never pays")]
    NoLeapfrog { margin: f64 },

    /// A structural assumption of the model failed after solving (e.g. the
    /// value function came out non-monotone). Reported, never silently fixed.
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// The outer fixed-point loop over integer support sizes revisited a
    /// state (or left the admissible range) without finding a self-consistent
    /// support. The visited path is reported in iteration order.
    #[error("no self-consistent support size: outer iteration visited {path:?} without a fixed point")]
    OuterNoFixedPoint { path: Vec<usize> },

    /// `v(gamma)` has no interior minimum in the searched bracket.
    #[error("no interior minimum of the speed function: {0}")]
    NoMinimum(String),

    /// An argument lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A fit window is outside the usable bulk of a front profile or contains
    /// statistically empty bins.
    #[error("window error: {0}")]
    WindowError(String),

    /// The deterministic cutoff front never settled to a steady advance rate.
    #[error("no steady front rate within {steps} steps (half-window velocities {v_first:.6} vs {v_second:.6})")]
    NoSteadyRate { steps: u64, v_first: f64, v_second: f64 },

    /// The particle population died out (defensive; the four-outcome rule
    /// always leaves at least one offspring per firm, so this is unreachable
    /// under the shipped dynamics).
    #[error("population extinct after step {step}")]
    Extinct { step: u64 },
}
