//! Solver for finite constrained total-cost decision processes with a
//! cemetery state.
//!
//! The model is a finite state space, finite per-state action sets, a
//! substochastic transition kernel whose row deficits feed an implicit
//! costless absorbing cemetery, and `J+1` nonnegative cost tables. The task
//! is to minimize the expected total objective cost subject to `J` budget
//! constraints on the other cost totals.
//!
//! The solver works in the space of occupation measures: expected visit
//! counts per state-action pair. Finite occupation measures form a
//! polyhedron cut out by a flow-balance equation, its extreme points are
//! exactly the occupations of deterministic stationary strategies, and the
//! constrained optimum — whenever every non-absorbing strategy is penalized
//! by some unbounded cost — is attained by mixing at most `J+1` of them.
//! The crate turns that structure into algorithms:
//!
//! * [`occupancy`] — the flow equation, exact finiteness classification,
//!   disintegration of measures into strategies, minimality repair, and
//!   Derman–Strauch markovization of mixtures;
//! * [`lp`] — the occupation-measure linear program, a two-phase dense
//!   simplex, and flow-polytope vertex enumeration;
//! * [`mixture`] — extreme-point tests, the penalization-assumption check,
//!   decomposition of an optimal measure into a small deterministic
//!   mixture, and the end-to-end constrained/feasibility solvers;
//! * [`sim`] — a seeded, reproducible Monte Carlo cross-check;
//! * [`files`] — TOML model/strategy/occupation formats and report output;
//! * [`cli`] — the `cmdp` command-line tool.

pub mod cli;
pub mod error;
pub mod files;
pub mod graph;
mod linalg;
pub mod lp;
pub mod mixture;
pub mod model;
pub mod occupancy;
pub mod sim;
pub mod tol;

pub use error::{CmdpError, Result};
pub use model::{
    as_stationary, make_stopping_mdp, validate_model, AnyStrategy, ConstrainedProblem,
    CostTable, DeterministicStrategy, FiniteMdpModel, MarkovStrategy, MixedStrategy, ModelData,
    StationaryStrategy, TransitionRow,
};
pub use occupancy::{
    classify_finiteness, cost_vector, evaluate_value, flow_residual, induced_strategy,
    markovize_mixture, minimality_repair, occupation_of_markov, occupation_of_mixed,
    occupation_of_stationary, FinitenessReport, ObjectiveVector, OccupationMeasure,
};
pub use tol::Tolerances;
