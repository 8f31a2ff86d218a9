//! The exact solver: a dense bounded simplex, best-first branch-and-bound,
//! the big-M product gadget, and the mixed-integer model of chain placement.

mod bnb;
mod gadget;
mod lp;
mod milp;
mod mps;

use thiserror::Error;

pub use bnb::{branch_and_bound, BnbOutcome, MilpStatus, SolveLimits};
pub use gadget::linearize_product;
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Relation, Row, RowId, VarId, Variable};
pub use milp::{build_milp, extract_deployment, solve_milp, solve_problem, ExactResult, MilpProblem};
pub use mps::write_mps;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinprogError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("big-M {gamma} is smaller than the upper bound {bound} of the multiplied variable")]
    GammaTooSmall { gamma: f64, bound: f64 },
    #[error("variable `{0}` is not binary")]
    NotBinary(String),
    #[error("integer variable `{name}` has fractional value {value}")]
    Fractional { name: String, value: f64 },
    #[error("no integral flow realizes the chosen instances")]
    NoIntegralFlow,
    #[error(transparent)]
    Input(#[from] crate::model::InputError),
}
