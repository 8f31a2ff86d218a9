use std::collections::BTreeSet;

use serde::Serialize;

use super::state::LayerState;
use super::KarizConfig;
use crate::flow::{reroute_commodities, Reroute, Terminal};
use crate::model::{Cost, NodeId, Quantity};
use crate::packing::min_cost_instances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Add,
    Open,
}

/// New contents of one function layer and of the two commodities around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub stage: usize,
    pub members: BTreeSet<NodeId>,
    /// Commodity `stage - 1`, per arc.
    pub inbound: Vec<u64>,
    /// Commodity `stage`, per arc, when the next layer is already reached.
    pub outbound: Option<Vec<u64>>,
    /// Allocation per node.
    pub alloc: Vec<u64>,
    /// Instance counts per node and VNF type.
    pub inst: Vec<Vec<u32>>,
}

impl Patch {
    /// The layer exactly as it stands.
    pub fn identity(state: &LayerState<'_>, stage: usize) -> Patch {
        let reached_next = stage < state.reached;
        Patch {
            stage,
            members: state.layers[stage].clone(),
            inbound: state.flows[stage - 1].clone(),
            outbound: reached_next.then(|| state.flows[stage].clone()),
            alloc: state.alloc[stage].clone(),
            inst: state.inst[stage].clone(),
        }
    }

    pub fn apply(&self, state: &mut LayerState<'_>) {
        let v = self.stage;
        state.layers[v] = self.members.clone();
        state.flows[v - 1] = self.inbound.clone();
        if let Some(out) = &self.outbound {
            state.flows[v] = out.clone();
        }
        state.alloc[v] = self.alloc.clone();
        state.inst[v] = self.inst.clone();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub kind: ActionKind,
    pub node: NodeId,
    /// Nodes closed by an `open`; empty for `add`.
    pub removed: Vec<NodeId>,
    pub stage: usize,
    pub delta: u64,
    pub cost_delta: Cost,
    pub patch: Patch,
}

impl Action {
    fn key(&self) -> (Cost, ActionKind, NodeId, u64, usize, &[NodeId]) {
        (self.cost_delta, self.kind, self.node, self.delta, self.stage, &self.removed)
    }
}

/// Total cost after applying `action`'s patch minus the current total.
pub fn action_cost(state: &LayerState<'_>, action: &Action) -> Cost {
    patch_cost(state, &action.patch)
}

pub(crate) fn patch_cost(state: &LayerState<'_>, patch: &Patch) -> Cost {
    let v = patch.stage;
    let hops = |arcs: &[u64]| arcs.iter().sum::<u64>() as i64;
    let mut bw = hops(&patch.inbound) - hops(&state.flows[v - 1]);
    if let Some(out) = &patch.outbound {
        bw += hops(out) - hops(&state.flows[v]);
    }
    let host = |inst: &[Vec<u32>]| -> Cost { inst.iter().map(|c| state.host_cost_of(v, c)).sum() };
    state.problem.beta * bw + host(&patch.inst) - host(&state.inst[v])
}

/// What every evaluation on one layer shares.
struct LayerScan {
    stage: usize,
    links: Vec<u64>,
    upstream: Vec<(NodeId, u64)>,
    downstream: Option<Vec<(NodeId, u64)>>,
    room: Vec<Vec<Quantity>>,
    capacity: Vec<u64>,
}

impl LayerScan {
    fn new(state: &LayerState<'_>, v: usize) -> Self {
        let n = state.problem.net.node_count();
        let room: Vec<Vec<Quantity>> = (0..n).map(|m| state.node_room(m, Some(v))).collect();
        let capacity = (0..n).map(|m| state.stage_capacity(v, m)).collect();
        LayerScan {
            stage: v,
            links: state.link_room(&[v - 1, v]),
            upstream: state.allocated(v - 1),
            downstream: (v < state.reached).then(|| state.allocated(v + 1)),
            room,
            capacity,
        }
    }
}

/// Scores `z_nv += delta` with the nodes of `removed` closed, rerouting both
/// commodities around the layer and repacking its instances.
fn evaluate(
    state: &LayerState<'_>,
    scan: &LayerScan,
    cfg: &KarizConfig,
    n: NodeId,
    removed: &[NodeId],
    delta: u64,
) -> Option<(Patch, Cost)> {
    let v = scan.stage;
    let demand = state.problem.chain.demand;
    let target = state.alloc[v][n] + delta;
    if delta == 0 || target > demand || target > scan.capacity[n] {
        return None;
    }
    let mut members = state.layers[v].clone();
    members.insert(n);
    for m in removed {
        members.remove(m);
    }
    let terminals: Vec<Terminal> = members
        .iter()
        .filter_map(|&m| match m {
            _ if m == n => Some(Terminal::fixed(m, target)),
            _ if state.alloc[v][m] > 0 => Some(Terminal::upto(m, state.alloc[v][m])),
            _ => None,
        })
        .collect();
    let routed = reroute_commodities(&Reroute {
        net: state.problem.net,
        residual: &scan.links,
        beta: state.problem.beta.cents(),
        upstream: &scan.upstream,
        layer: &terminals,
        downstream: scan.downstream.as_deref(),
        amount: demand,
        lp_max_vars: cfg.lp_reroute_max_vars,
    })?;
    let node_count = state.problem.net.node_count();
    let mut alloc = vec![0; node_count];
    let mut inst = vec![vec![0; state.cands[v].len()]; node_count];
    for (t, &z) in terminals.iter().zip(&routed.allocation) {
        if z > 0 {
            let pack = min_cost_instances(&scan.room[t.node], z, &state.cands[v], cfg.objective)?;
            alloc[t.node] = z;
            inst[t.node] = pack.counts;
        }
    }
    let patch = Patch { stage: v, members, inbound: routed.inbound, outbound: routed.outbound, alloc, inst };
    let cost = patch_cost(state, &patch);
    Some((patch, cost))
}

/// Throughput increments worth trying at `n`: every type's throughput, the
/// gaps up to multiples of each type, the node's capacity and remaining
/// demand, and the allocations an `open` could absorb.
fn candidate_deltas(state: &LayerState<'_>, scan: &LayerScan, n: NodeId) -> Vec<u64> {
    let v = scan.stage;
    let z = state.alloc[v][n];
    let demand = state.problem.chain.demand;
    let limit = demand.min(scan.capacity[n]);
    if limit <= z {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    for c in &state.cands[v] {
        out.insert(c.mbps);
        for j in 1..=limit / c.mbps {
            out.insert((j * c.mbps).saturating_sub(z));
        }
    }
    out.insert(limit - z);
    out.insert(demand - z);
    let layer = &state.layers[v];
    let allocated: Vec<u64> = layer.iter().filter(|&&m| m != n).map(|&m| state.alloc[v][m]).filter(|&a| a > 0).collect();
    out.extend(allocated.iter().copied());
    out.insert(allocated.iter().sum());
    out.into_iter().filter(|&d| d > 0 && z + d <= limit).collect()
}

/// Best `add` or `open` on any reached function layer, or `None` if no
/// action lowers the cost.
///
/// `open` grows its set of closed nodes greedily: each step closes the node
/// whose removal lowers the cost most, provided its allocation still fits
/// in what `delta` has not yet absorbed.
pub fn propose_best_action(state: &LayerState<'_>, cfg: &KarizConfig) -> Option<Action> {
    let chain = &state.problem.chain;
    let last = state.reached.min(chain.len());
    let mut best: Option<Action> = None;
    let mut offer = |a: Action| {
        if a.cost_delta < Cost::ZERO && best.as_ref().is_none_or(|b| a.key() < b.key()) {
            best = Some(a);
        }
    };
    for v in 1..=last {
        let scan = LayerScan::new(state, v);
        for n in 0..state.problem.net.node_count() {
            for delta in candidate_deltas(state, &scan, n) {
                let Some((patch, cost)) = evaluate(state, &scan, cfg, n, &[], delta) else {
                    continue;
                };
                offer(Action {
                    kind: ActionKind::Add,
                    node: n,
                    removed: Vec::new(),
                    stage: v,
                    delta,
                    cost_delta: cost,
                    patch,
                });
                if let Some(open) = greedy_open(state, &scan, cfg, n, delta, cost) {
                    offer(open);
                }
            }
        }
    }
    best
}

fn greedy_open(
    state: &LayerState<'_>,
    scan: &LayerScan,
    cfg: &KarizConfig,
    n: NodeId,
    delta: u64,
    start: Cost,
) -> Option<Action> {
    let v = scan.stage;
    let mut removed: Vec<NodeId> = Vec::new();
    let mut absorbed = 0;
    let mut current: Option<(Patch, Cost)> = None;
    let mut current_cost = start;
    loop {
        let mut step: Option<(NodeId, Patch, Cost)> = None;
        for &m in &state.layers[v] {
            let z = state.alloc[v][m];
            if m == n || z == 0 || removed.contains(&m) || absorbed + z > delta {
                continue;
            }
            removed.push(m);
            let scored = evaluate(state, scan, cfg, n, &removed, delta);
            removed.pop();
            if let Some((patch, cost)) = scored {
                if step.as_ref().is_none_or(|s| cost < s.2) {
                    step = Some((m, patch, cost));
                }
            }
        }
        match step {
            Some((m, patch, cost)) if cost < current_cost => {
                removed.push(m);
                absorbed += state.alloc[v][m];
                current_cost = cost;
                current = Some((patch, cost));
            }
            _ => break,
        }
    }
    let (patch, cost_delta) = current?;
    removed.sort_unstable();
    Some(Action { kind: ActionKind::Open, node: n, removed, stage: v, delta, cost_delta, patch })
}
