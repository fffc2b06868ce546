//! Error type shared by every module.
//!
//! Errors split into two families, mirrored by the process exit codes of the
//! command-line driver: configuration errors (malformed specs, requests for
//! points outside the reachable region) map to exit code 1, numeric failures
//! (non-convergence, budget exhaustion, tolerance violations) map to exit
//! code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed walk spec text or structurally invalid spec.
    #[error("invalid walk spec{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    InvalidSpec { line: Option<usize>, msg: String },

    /// Step weights must sum to one (exactly for rationals, to 1e-12 for decimals).
    #[error("step weights sum to {sum}, expected exactly 1")]
    WeightSum { sum: String },

    /// The step vectors lie in an affine hyperplane, so the walk does not
    /// spread in all `d` directions.
    #[error("degenerate support: step vectors lie in an affine hyperplane")]
    DegenerateSupport,

    /// The walk cannot reach all of Z^d.
    #[error("walk is not irreducible: {reason}")]
    NotIrreducible { reason: String },

    /// A reachability search ran out of its step budget; the answer is
    /// inconclusive, which is reported distinctly from a definite no.
    #[error("search budget of {budget} exceeded while {what}; result inconclusive")]
    SearchBudgetExceeded { what: String, budget: usize },

    /// The requested velocity is not strictly inside the hull of the steps.
    #[error("point ({}) is {where_} the support hull, not strictly inside", fmt_vec(delta))]
    NotInInterior { delta: Vec<f64>, where_: &'static str },

    /// The requested velocity is closer to the hull boundary than the guard
    /// distance; callers must opt in explicitly to solve there.
    #[error("point is {dist:.3e} from the hull boundary (guard {guard:.3e}); pass an explicit near-boundary override")]
    NearBoundary { dist: f64, guard: f64 },

    /// Newton iteration did not meet the gradient tolerance.
    #[error("saddle solver hit the iteration cap {iterations} with gradient gap {gap:.3e}")]
    MaxIterations { iterations: usize, gap: f64 },

    /// Evaluating exp would overflow; callers should use the log-domain path.
    #[error("exponent {max_exponent:.3e} exceeds the overflow guard; evaluate in the log domain")]
    OverflowGuard { max_exponent: f64 },

    /// A kernel table would exceed the configured memory budget.
    #[error("kernel table needs ~{required_mb} MB, budget is {budget_mb} MB")]
    MemoryBudget { required_mb: usize, budget_mb: usize },

    /// The formula applies only to a specific model family.
    #[error("formula requires {expected}")]
    WrongModel { expected: &'static str },

    /// A self-check found values violating a documented invariant.
    #[error("invariant violated: {what} (witness {witness})")]
    InvariantViolation { what: String, witness: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the command-line driver maps this error to.
    /// 1 = bad configuration or zero-measure request, 2 = numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec { .. }
            | Error::WeightSum { .. }
            | Error::DegenerateSupport
            | Error::NotIrreducible { .. }
            | Error::NotInInterior { .. }
            | Error::WrongModel { .. }
            | Error::InvalidArgument(_)
            | Error::Io(_) => 1,
            Error::SearchBudgetExceeded { .. }
            | Error::NearBoundary { .. }
            | Error::MaxIterations { .. }
            | Error::OverflowGuard { .. }
            | Error::MemoryBudget { .. }
            | Error::InvariantViolation { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(", ")
}
