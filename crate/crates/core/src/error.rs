//! Crate-wide error type and the process exit codes derived from it.
//!
//! Every fallible operation in the library funnels into [`CmdpError`]. The
//! variants are grouped by how the command-line tool reports them:
//!
//! | exit code | meaning                                  |
//! |-----------|------------------------------------------|
//! | 0         | success                                  |
//! | 2         | the constrained problem is infeasible    |
//! | 3         | penalization assumption violated         |
//! | 4         | input validation / parse error           |
//! | 5         | internal numerical failure               |

use thiserror::Error;

/// Exit code for infeasible constrained problems.
pub const EXIT_INFEASIBLE: i32 = 2;
/// Exit code when the penalization assumption fails and is not overridden.
pub const EXIT_ASSUMPTION: i32 = 3;
/// Exit code for malformed input (files or in-memory data).
pub const EXIT_VALIDATION: i32 = 4;
/// Exit code for numerical failures that indicate a bug or a pathological
/// instance (singular systems, iteration caps, failed decompositions).
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Error)]
pub enum CmdpError {
    // ---- validation: model data ------------------------------------------
    #[error("transition row for ({state}, {action}) sums to {sum} > 1")]
    RowSumExceedsOne {
        state: String,
        action: String,
        sum: f64,
    },
    #[error("cost '{cost}' is negative at ({state}, {action}): {value}")]
    NegativeCost {
        cost: String,
        state: String,
        action: String,
        value: f64,
    },
    #[error("unknown state '{0}' referenced")]
    UnknownStateReference(String),
    #[error("unknown action '{action}' referenced at state '{state}'")]
    UnknownActionReference { state: String, action: String },
    #[error("state '{0}' has an empty action set")]
    EmptyActionSet(String),
    #[error("action name '{0}' clashes with the reserved stopping action")]
    ActionNameClash(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    // ---- validation: files and arguments ----------------------------------
    #[error("parse error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    ParseError {
        message: String,
        location: Option<String>,
    },
    #[error("could not read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("selector space too large to enumerate: {0} deterministic strategies (limit {1})")]
    TooManySelectors(u128, u64),
    #[error("occupation measure is not flow-feasible: residual {0:.3e} exceeds tolerance")]
    NotFlowFeasible(f64),

    // ---- problem-level outcomes -------------------------------------------
    #[error("constrained problem is infeasible")]
    InfeasibleProblem,
    #[error(
        "penalization assumption violated: reachable zero-cost end component {{{}}}",
        witness_states.join(", ")
    )]
    AssumptionViolated { witness_states: Vec<String> },

    // ---- numerical failures -----------------------------------------------
    #[error("strategy has infinite expected occupation; zero-leak witness {{{}}}", witness_states.join(", "))]
    InfiniteOccupation { witness_states: Vec<String> },
    #[error("linear system singular despite finite classification (pivot {pivot:.3e})")]
    SingularSystem { pivot: f64 },
    #[error("simplex iteration limit reached after {0} pivots")]
    IterationLimit(u64),
    #[error("value iteration did not converge within {sweeps} sweeps (residual {residual:.3e})")]
    NonConvergent { sweeps: u64, residual: f64 },
    #[error("feasible region is unbounded: recession ray on zero-leak columns")]
    UnboundedPolytope,
    #[error("minimality repair produced an infinite occupation; induced strategy is defective")]
    RepairFailed,
    #[error("no deterministic strategy with finite occupation available as a mixture candidate")]
    EmptyCandidatePool,
    #[error("no candidate mixture reproduces the target within tolerance: {0}")]
    DecompositionFailed(String),
}

impl CmdpError {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        use CmdpError::*;
        match self {
            InfeasibleProblem => EXIT_INFEASIBLE,
            AssumptionViolated { .. } => EXIT_ASSUMPTION,
            RowSumExceedsOne { .. }
            | NegativeCost { .. }
            | UnknownStateReference(_)
            | UnknownActionReference { .. }
            | EmptyActionSet(_)
            | ActionNameClash(_)
            | InvalidModel(_)
            | ParseError { .. }
            | Io { .. }
            | ShapeMismatch(_)
            | InvalidArgument(_)
            | TooManySelectors(..)
            | NotFlowFeasible(_) => EXIT_VALIDATION,
            InfiniteOccupation { .. }
            | SingularSystem { .. }
            | IterationLimit(_)
            | NonConvergent { .. }
            | UnboundedPolytope
            | RepairFailed
            | EmptyCandidatePool
            | DecompositionFailed(_) => EXIT_NUMERICAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, CmdpError>;
