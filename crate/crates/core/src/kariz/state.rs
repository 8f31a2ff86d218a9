use std::collections::BTreeSet;

use crate::model::{Arc, Cost, Deployment, NodeId, Problem, Quantity};
use crate::packing::{can_host, max_throughput, Candidate};

/// A partial solution grown layer by layer.
///
/// Stage indices follow [`crate::model::Chain`]: `0` is the source, `k + 1`
/// the target. `flows[c]` holds commodity `c` per arc; `alloc[u][m]` is
/// `z_mu`; `inst[u][m][t]` counts instances of VNF type `t`.
#[derive(Debug, Clone)]
pub struct LayerState<'p> {
    pub problem: &'p Problem<'p>,
    pub layers: Vec<BTreeSet<NodeId>>,
    pub alloc: Vec<Vec<u64>>,
    pub inst: Vec<Vec<Vec<u32>>>,
    pub flows: Vec<Vec<u64>>,
    /// Last stage whose allocations are set; `0` before the first ring.
    pub reached: usize,
    pub(crate) cands: Vec<Vec<Candidate>>,
}

impl<'p> LayerState<'p> {
    /// Empty solution with the endpoint allocations pinned and every
    /// function layer holding the nodes that can host one of its types.
    pub fn new(problem: &'p Problem<'p>) -> Self {
        let net = problem.net;
        let chain = &problem.chain;
        let n = net.node_count();
        let stages = chain.stages.len();
        let cands: Vec<Vec<Candidate>> = chain
            .stages
            .iter()
            .zip(&problem.unit_cost)
            .map(|(s, cost)| Candidate::for_stage(s, cost))
            .collect();
        let mut layers = vec![BTreeSet::new(); stages];
        layers[0].insert(chain.source);
        layers[stages - 1].insert(chain.target);
        for u in chain.function_stages() {
            layers[u] = (0..n).filter(|&m| can_host(&net.node(m).capacity, &cands[u])).collect();
        }
        let mut alloc = vec![vec![0; n]; stages];
        alloc[0][chain.source] = chain.demand;
        alloc[stages - 1][chain.target] = chain.demand;
        let inst = chain.stages.iter().map(|s| vec![vec![0; s.vnfs.len()]; n]).collect();
        LayerState {
            problem,
            layers,
            alloc,
            inst,
            flows: vec![vec![0; net.arc_count()]; chain.commodity_count()],
            reached: 0,
            cands,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.alloc.len()
    }

    pub fn target_stage(&self) -> usize {
        self.stage_count() - 1
    }

    /// Node resources left after this chain's instances, ignoring those of
    /// `except` if given.
    pub fn node_room(&self, m: NodeId, except: Option<usize>) -> Vec<Quantity> {
        let mut room = self.problem.net.node(m).capacity.clone();
        for (u, per_node) in self.inst.iter().enumerate() {
            if Some(u) == except {
                continue;
            }
            for (t, &count) in per_node[m].iter().enumerate() {
                if count > 0 {
                    for (r, d) in room.iter_mut().zip(&self.cands[u][t].demand) {
                        *r -= *d * count as i64;
                    }
                }
            }
        }
        room
    }

    /// Per-link bandwidth left after every commodity not in `except`.
    pub fn link_room(&self, except: &[usize]) -> Vec<u64> {
        let net = self.problem.net;
        let mut room: Vec<u64> = net.links().iter().map(|l| l.mbps).collect();
        for (c, arcs) in self.flows.iter().enumerate() {
            if except.contains(&c) {
                continue;
            }
            for (l, r) in room.iter_mut().enumerate() {
                *r -= arcs[Arc::forward(l).0] + arcs[Arc::backward(l).0];
            }
        }
        room
    }

    /// Largest throughput stage `u` could reach on node `m` if its own
    /// instances there were repacked.
    pub fn stage_capacity(&self, u: usize, m: NodeId) -> u64 {
        max_throughput(&self.node_room(m, Some(u)), &self.cands[u]).mbps
    }

    /// Nodes of stage `u` with positive allocation, as routing terminals.
    pub fn allocated(&self, u: usize) -> Vec<(NodeId, u64)> {
        self.alloc[u].iter().enumerate().filter(|(_, &z)| z > 0).map(|(m, &z)| (m, z)).collect()
    }

    pub fn bandwidth_cost(&self) -> Cost {
        let hops: u64 = self.flows.iter().flatten().sum();
        self.problem.beta * hops as i64
    }

    pub fn host_cost_of(&self, u: usize, counts: &[u32]) -> Cost {
        counts.iter().zip(&self.problem.unit_cost[u]).map(|(&n, &c)| c * n as i64).sum()
    }

    pub fn host_cost(&self) -> Cost {
        (0..self.stage_count())
            .flat_map(|u| self.inst[u].iter().map(move |counts| (u, counts)))
            .map(|(u, counts)| self.host_cost_of(u, counts))
            .sum()
    }

    pub fn cost(&self) -> Cost {
        self.bandwidth_cost() + self.host_cost()
    }

    /// Deployment holding everything placed so far.
    pub fn to_deployment(&self) -> Deployment {
        let chain = &self.problem.chain;
        let mut dep = Deployment::new();
        for (c, arcs) in self.flows.iter().enumerate() {
            for (a, &v) in arcs.iter().enumerate() {
                dep.add_flow(c, Arc(a), v);
            }
        }
        for u in chain.function_stages() {
            for (m, counts) in self.inst[u].iter().enumerate() {
                for (t, &count) in counts.iter().enumerate() {
                    dep.add_instances(m, u, t, count);
                }
                dep.add_allocation(m, u, self.alloc[u][m]);
            }
        }
        dep
    }
}

/// Prunes layers after an improvement round.
///
/// Reached function layers keep only nodes that allocate throughput; layers
/// not yet reached drop nodes that can no longer host any of their types.
/// The endpoint layers are left alone.
pub fn update_layers(state: &mut LayerState<'_>) {
    for u in state.problem.chain.function_stages() {
        let keep: BTreeSet<NodeId> = if u <= state.reached {
            state.layers[u].iter().copied().filter(|&m| state.alloc[u][m] > 0).collect()
        } else {
            state.layers[u]
                .iter()
                .copied()
                .filter(|&m| can_host(&state.node_room(m, None), &state.cands[u]))
                .collect()
        };
        state.layers[u] = keep;
    }
}
