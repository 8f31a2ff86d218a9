use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
    /// Cost of one unit, in cents. Never negative.
    pub cost: i64,
}

/// A directed graph for single-commodity min-cost flow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, arcs: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    /// Adds an arc and returns its index.
    ///
    /// # Panics
    /// On an endpoint outside the graph or a negative cost.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: u64, cost: i64) -> usize {
        assert!(from < self.nodes && to < self.nodes, "arc endpoint out of range");
        assert!(cost >= 0, "negative arc cost");
        self.arcs.push(FlowArc { from, to, capacity, cost });
        self.arcs.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowResult {
    /// Flow on each arc, indexed like the network's arcs.
    pub flow: Vec<u64>,
    pub cost: i64,
    pub amount: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("only {max_flow} units can reach the sink")]
pub struct Infeasible {
    pub max_flow: u64,
}

const UNREACHED: i64 = i64::MAX;

/// Minimum-cost flow of exactly `amount` units from `source` to `sink`.
///
/// Successive shortest paths with Dijkstra on reduced costs. Among equally
/// short paths the one whose last arc has the lowest index wins, so results
/// are deterministic.
pub fn min_cost_flow(
    net: &FlowNetwork,
    source: usize,
    sink: usize,
    amount: u64,
) -> Result<FlowResult, Infeasible> {
    let n = net.nodes;
    let m = net.arcs.len();
    let mut flow = vec![0u64; m];
    if amount == 0 || source == sink {
        return Ok(FlowResult { flow, cost: 0, amount });
    }
    // Residual edge 2k is arc k forward, 2k + 1 its reverse.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, a) in net.arcs.iter().enumerate() {
        out[a.from].push(2 * k);
        out[a.to].push(2 * k + 1);
    }
    let residual = |e: usize, flow: &[u64]| -> u64 {
        let k = e / 2;
        if e % 2 == 0 {
            net.arcs[k].capacity - flow[k]
        } else {
            flow[k]
        }
    };
    let head = |e: usize| if e % 2 == 0 { net.arcs[e / 2].to } else { net.arcs[e / 2].from };
    let tail = |e: usize| if e % 2 == 0 { net.arcs[e / 2].from } else { net.arcs[e / 2].to };
    let cost = |e: usize| if e % 2 == 0 { net.arcs[e / 2].cost } else { -net.arcs[e / 2].cost };

    let mut potential = vec![0i64; n];
    let mut sent = 0u64;
    let mut total = 0i64;
    let mut dist = vec![UNREACHED; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    while sent < amount {
        dist.fill(UNREACHED);
        parent.fill(None);
        done.fill(false);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if done[v] || d > dist[v] {
                continue;
            }
            done[v] = true;
            for &e in &out[v] {
                if residual(e, &flow) == 0 {
                    continue;
                }
                let w = head(e);
                if done[w] {
                    continue;
                }
                let nd = d + cost(e) + potential[v] - potential[w];
                debug_assert!(nd >= d, "negative reduced cost");
                let better = nd < dist[w] || (nd == dist[w] && parent[w].is_some_and(|p| e / 2 < p / 2));
                if better {
                    if nd < dist[w] {
                        heap.push(Reverse((nd, w)));
                    }
                    dist[w] = nd;
                    parent[w] = Some(e);
                }
            }
        }
        if dist[sink] == UNREACHED {
            return Err(Infeasible { max_flow: sent });
        }
        for v in 0..n {
            if dist[v] != UNREACHED {
                potential[v] += dist[v];
            }
        }
        let mut push = amount - sent;
        let mut v = sink;
        while let Some(e) = parent[v] {
            push = push.min(residual(e, &flow));
            v = tail(e);
        }
        let mut v = sink;
        while let Some(e) = parent[v] {
            let k = e / 2;
            if e % 2 == 0 {
                flow[k] += push;
            } else {
                flow[k] -= push;
            }
            total += cost(e) * push as i64;
            v = tail(e);
        }
        sent += push;
    }
    Ok(FlowResult { flow, cost: total, amount })
}
