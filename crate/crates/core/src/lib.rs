//! A lifted forward planner for bounded planning over open-world
//! knowledge bases.
//!
//! Initial knowledge is a finite set of known-true and known-false ground
//! literals per fluent; everything else is unknown. Actions are instantiated
//! at search time by answering their preconditions as conjunctive queries,
//! so objects can be created and destroyed during planning.

pub mod bat;
pub mod benchmarks;
pub mod dsl;
pub mod grounding;
pub mod heuristic;
pub mod kb;
pub mod oracle;
pub mod progression;
pub mod search;

pub use bat::{validate_bat, ActionSchema, ArgSpec, Bat, EvalError, FunctionRegistry, GroundAction, Ssa, SsaDisjunct};
pub use dsl::{parse_domain, parse_plan, parse_problem, ProblemSpec};
pub use grounding::find_possible_actions;
pub use heuristic::{build_graph, h_estimate, GraphOutcome, PlanningGraph};
pub use kb::{answer_ecq, v_ecq, Constant, Ecq, FgpTheory, FluentId, GroundAtom, KbError, Signature, TruthValue};
pub use oracle::{oracle_plan, OracleConfig, OracleResult};
pub use progression::{progress, progress_sequence, ProgressError, Situation};
pub use search::{plan, validate_plan, Outcome, PlanResult, PlannerConfig, SearchStats, ValidationFailure};

/// Errors that abort planning.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Progress(#[from] ProgressError),
    #[error("internal error: {0}")]
    Internal(String),
}
