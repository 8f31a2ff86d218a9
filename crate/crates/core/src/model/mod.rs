//! Networks, chains, catalogs and deployments, plus the constraint checker
//! and the cost function every solver is judged by.

mod chain;
mod cost;
mod deployment;
mod error;
mod feasibility;
pub mod fixtures;
mod network;
mod units;

pub use chain::{
    validate_inputs, Chain, ChainRequest, Stage, StageRole, VnfCatalog, VnfKind, VnfType,
};
pub use cost::{total_cost, CostBreakdown, CostModel, Problem};
pub use deployment::{
    AllocationEntry, Deployment, DeploymentView, FlowEntry, InstanceEntry, InstanceKey,
};
pub use error::InputError;
pub use feasibility::{
    check_deployment, feasibility_check, ConstraintFamily, ConstraintReport, FamilyReport,
    Violation,
};
pub use network::{Arc, Link, LinkFile, LinkId, NetworkFile, Node, NodeFile, NodeId, SubstrateNetwork};
pub use units::{Cost, Quantity};
