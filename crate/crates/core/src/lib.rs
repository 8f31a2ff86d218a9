//! Placement of service function chains as multiple heterogeneous VNF
//! instances over a capacitated substrate network.
//!
//! Two solvers share one model:
//!
//! * [`linprog`] builds the linearized mixed-integer program and solves it
//!   exactly with an in-crate simplex and branch-and-bound.
//! * [`kariz`] routes traffic layer by layer with min-cost flows, sizes
//!   instances with multidimensional knapsacks and then improves the
//!   placement with `add`/`open` local-search actions.
//!
//! [`simlab`] drives either solver through a stochastic arrival/departure
//! workload on a fat-tree and reports acceptance, utilization and cost.

pub mod flow;
pub mod kariz;
pub mod linprog;
pub mod model;
pub mod packing;
pub mod simlab;

pub use model::{
    feasibility_check, total_cost, validate_inputs, Chain, ChainRequest, ConstraintReport, Cost,
    CostBreakdown, CostModel, Deployment, InputError, Problem, Quantity, SubstrateNetwork,
    VnfCatalog, VnfType,
};
