//! Layer-by-layer heuristic: route the chain demand from one layer of
//! candidate nodes to the next with min-cost flows, size instances with the
//! knapsacks of [`crate::packing`], then improve with `add`/`open` actions
//! until no action gains a fixed fraction of the current cost.

mod action;
mod state;

use std::fmt;

use serde::Serialize;

pub use action::{action_cost, propose_best_action, Action, ActionKind, Patch};
pub use state::{update_layers, LayerState};

use crate::flow::{route_between_layers, LP_REROUTE_MAX_VARS};
use crate::model::{
    ChainRequest, Cost, CostBreakdown, CostModel, Deployment, InputError, NodeId, Problem,
    SubstrateNetwork, VnfCatalog,
};
use crate::packing::{max_throughput, min_cost_instances, PackingObjective};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KarizConfig {
    /// Admissibility parameter: an action must gain `epsilon / (4|N|)` of
    /// the current cost.
    pub epsilon: f64,
    pub lp_reroute_max_vars: usize,
    pub objective: PackingObjective,
}

impl Default for KarizConfig {
    fn default() -> Self {
        KarizConfig { epsilon: 20.0, lp_reroute_max_vars: LP_REROUTE_MAX_VARS, objective: PackingObjective::HostCost }
    }
}

impl KarizConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        KarizConfig { epsilon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(InputError::Parse(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    /// No node of the layer can host any instance.
    EmptyLayer { stage: usize },
    /// The demand cannot be carried into the layer.
    Routing { stage: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::EmptyLayer { stage } => write!(f, "no node can host stage {stage}"),
            Rejection::Routing { stage } => write!(f, "demand cannot be routed into stage {stage}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedAction {
    pub kind: ActionKind,
    pub node: NodeId,
    pub removed: Vec<NodeId>,
    pub stage: usize,
    pub delta: u64,
    pub before: Cost,
    pub cost_delta: Cost,
}

/// One call of [`improve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImproveLog {
    /// Minimum relative gain of an applied action.
    pub theta: f64,
    pub initial: Cost,
    pub last: Cost,
    pub actions: Vec<AppliedAction>,
}

impl ImproveLog {
    /// Whether the action count respects the geometric-decrease bound and
    /// every action gained at least `theta` of the cost before it.
    pub fn within_bound(&self) -> bool {
        let each = self
            .actions
            .iter()
            .all(|a| -(a.cost_delta.cents() as f64) >= self.theta * a.before.cents() as f64 - 1e-9);
        each && (self.actions.len() as f64) <= self.action_bound()
    }

    /// `ln(C0 / C_final) / -ln(1 - theta) + 1`, or infinity when the final
    /// cost is zero.
    pub fn action_bound(&self) -> f64 {
        if self.actions.is_empty() {
            return 1.0;
        }
        let (c0, c1) = (self.initial.cents() as f64, self.last.cents() as f64);
        if c1 <= 0.0 || self.theta >= 1.0 {
            return f64::INFINITY;
        }
        (c0 / c1).ln() / -(1.0 - self.theta).ln() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Accepted {
    pub deployment: Deployment,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KarizRun {
    pub result: Result<Accepted, Rejection>,
    pub logs: Vec<ImproveLog>,
}

impl KarizRun {
    pub fn accepted(&self) -> Option<&Accepted> {
        self.result.as_ref().ok()
    }
}

pub fn deploy(
    net: &SubstrateNetwork,
    req: &ChainRequest,
    cat: &VnfCatalog,
    cost: &CostModel,
    cfg: &KarizConfig,
) -> Result<KarizRun, InputError> {
    cfg.validate()?;
    let problem = Problem::new(net, req, cat, cost)?;
    Ok(deploy_problem(&problem, cfg))
}

/// Rings from the source layer to the target layer, improving and pruning
/// layers after each.
pub fn deploy_problem(problem: &Problem<'_>, cfg: &KarizConfig) -> KarizRun {
    deploy_with_state(problem, cfg).1
}

/// [`deploy_problem`], also returning the layer state where it stopped.
pub fn deploy_with_state<'p>(problem: &'p Problem<'p>, cfg: &KarizConfig) -> (LayerState<'p>, KarizRun) {
    let mut state = LayerState::new(problem);
    let mut logs = Vec::new();
    for v in 1..=state.target_stage() {
        if let Err(reason) = advance(&mut state, v, cfg.objective) {
            return (state, KarizRun { result: Err(reason), logs });
        }
        logs.push(improve(&mut state, cfg));
        update_layers(&mut state);
    }
    let deployment = state.to_deployment();
    let cost = problem.cost_of(&deployment);
    (state, KarizRun { result: Ok(Accepted { deployment, cost }), logs })
}

/// Routes the demand from the allocations of stage `v - 1` into layer `v`
/// and sizes the instances there.
pub(crate) fn advance(state: &mut LayerState<'_>, v: usize, objective: PackingObjective) -> Result<(), Rejection> {
    let problem = state.problem;
    let demand = problem.chain.demand;
    let sinks: Vec<(NodeId, u64)> = if v == state.target_stage() {
        vec![(problem.chain.target, demand)]
    } else {
        state.layers[v]
            .iter()
            .map(|&m| (m, max_throughput(&state.node_room(m, None), &state.cands[v]).mbps))
            .filter(|&(_, cap)| cap > 0)
            .collect()
    };
    if sinks.is_empty() {
        return Err(Rejection::EmptyLayer { stage: v });
    }
    let sources = state.allocated(v - 1);
    let links = state.link_room(&[v - 1]);
    let flow = route_between_layers(problem.net, &links, problem.beta.cents(), &sources, &sinks, demand)
        .map_err(|_| Rejection::Routing { stage: v })?;
    state.flows[v - 1] = flow.arcs;
    if v < state.target_stage() {
        for (&(m, _), &z) in sinks.iter().zip(&flow.absorbed) {
            if z == 0 {
                continue;
            }
            let pack = min_cost_instances(&state.node_room(m, None), z, &state.cands[v], objective)
                .expect("routing never exceeds the node's maximum throughput");
            state.alloc[v][m] = z;
            state.inst[v][m] = pack.counts;
        }
    }
    state.reached = v;
    Ok(())
}

/// Applies the best admissible action until there is none.
pub fn improve(state: &mut LayerState<'_>, cfg: &KarizConfig) -> ImproveLog {
    let nodes = state.problem.net.node_count();
    let initial = state.cost();
    let mut actions = Vec::new();
    while let Some(action) = propose_best_action(state, cfg) {
        if !admissible(state, &action, cfg.epsilon) {
            break;
        }
        let before = state.cost();
        action.patch.apply(state);
        debug_assert_eq!(state.cost(), before + action.cost_delta);
        actions.push(AppliedAction {
            kind: action.kind,
            node: action.node,
            removed: action.removed,
            stage: action.stage,
            delta: action.delta,
            before,
            cost_delta: action.cost_delta,
        });
    }
    ImproveLog { theta: theta(cfg.epsilon, nodes), initial, last: state.cost(), actions }
}

pub fn theta(epsilon: f64, nodes: usize) -> f64 {
    epsilon / (4.0 * nodes as f64)
}

/// Whether `action` strictly lowers the cost by at least
/// `epsilon / (4|N|)` of the current total.
///
/// Compared exactly in integers with `epsilon` taken to six decimals.
pub fn admissible(state: &LayerState<'_>, action: &Action, epsilon: f64) -> bool {
    gain_is_admissible(action.cost_delta, state.cost(), epsilon, state.problem.net.node_count())
}

pub fn gain_is_admissible(delta: Cost, current: Cost, epsilon: f64, nodes: usize) -> bool {
    if delta >= Cost::ZERO {
        return false;
    }
    let eps_micro = (epsilon * 1e6).round() as i128;
    let gain = -(delta.cents() as i128);
    gain * 4 * nodes as i128 * 1_000_000 >= eps_micro * current.cents() as i128
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprog::{solve_problem, SolveLimits};
    use crate::model::fixtures::worked_example;
    use crate::model::{check_deployment, VnfType};

    fn c(units: i64) -> Cost {
        Cost::from_cents(units * 100)
    }

    #[test]
    fn admissibility_threshold() {
        assert!(gain_is_admissible(c(-6), c(100), 20.0, 100));
        assert!(gain_is_admissible(c(-5), c(100), 20.0, 100));
        assert!(!gain_is_admissible(c(-4), c(100), 20.0, 100));
        assert!(!gain_is_admissible(Cost::ZERO, Cost::ZERO, 20.0, 100));
        assert!(!gain_is_admissible(c(1), c(100), 20.0, 100));
    }

    #[test]
    fn doubling_epsilon_never_admits_more() {
        for delta in -200..0 {
            for current in [1, 50, 99, 100, 101, 1000, 12345] {
                let d = Cost::from_cents(delta);
                let cur = Cost::from_cents(current);
                if gain_is_admissible(d, cur, 40.0, 10) {
                    assert!(gain_is_admissible(d, cur, 20.0, 10));
                }
            }
        }
    }

    #[test]
    fn worked_example_is_accepted() {
        let (net, cat, req) = worked_example();
        let cost = CostModel::default();
        let run = deploy(&net, &req, &cat, &cost, &KarizConfig::default()).unwrap();
        let acc = run.accepted().expect("accepted");
        let p = Problem::new(&net, &req, &cat, &cost).unwrap();
        assert!(check_deployment(&net, &p.chain, &acc.deployment).unwrap().is_feasible());
        assert_eq!(acc.deployment.stage_allocation(1), 210);
        assert_eq!(acc.deployment.stage_allocation(2), 210);
        let exact = solve_problem(&p, SolveLimits::default()).unwrap();
        assert!(exact.cost.unwrap().total <= acc.cost.total);
        assert!(run.logs.iter().all(ImproveLog::within_bound));
    }

    #[test]
    fn oversized_vnf_empties_the_first_layer() {
        let (net, _, _) = worked_example();
        let cat = VnfCatalog::new().with("big", vec![VnfType::new("big", 100, &[("cpu", 9.0)])]);
        let req = ChainRequest::new(&["big"], "A", "F", 100);
        let run = deploy(&net, &req, &cat, &CostModel::default(), &KarizConfig::default()).unwrap();
        assert_eq!(run.result, Err(Rejection::EmptyLayer { stage: 1 }));
    }

    #[test]
    fn nonpositive_epsilon_is_an_input_error() {
        let (net, cat, req) = worked_example();
        let cfg = KarizConfig::with_epsilon(0.0);
        assert!(deploy(&net, &req, &cat, &CostModel::default(), &cfg).is_err());
    }

    #[test]
    fn deploy_is_deterministic() {
        let (net, cat, req) = worked_example();
        let a = deploy(&net, &req, &cat, &CostModel::default(), &KarizConfig::default()).unwrap();
        let b = deploy(&net, &req, &cat, &CostModel::default(), &KarizConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quiescent_state_is_left_alone() {
        // One host between source and target: nothing can move.
        let (net, _, _) = worked_example();
        let cat = VnfCatalog::new().with("fw", vec![VnfType::new("fw", 100, &[("cpu", 1.0)])]);
        let req = ChainRequest::new(&["fw"], "A", "B", 100);
        let p = Problem::new(&net, &req, &cat, &CostModel::default()).unwrap();
        let mut st = LayerState::new(&p);
        advance(&mut st, 1, PackingObjective::HostCost).unwrap();
        advance(&mut st, 2, PackingObjective::HostCost).unwrap();
        let before = st.to_deployment();
        let log = improve(&mut st, &KarizConfig::default());
        assert!(log.actions.is_empty());
        assert_eq!(st.to_deployment(), before);
    }
}
