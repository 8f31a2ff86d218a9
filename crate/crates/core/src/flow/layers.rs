use crate::linprog::{solve_lp, LinearProgram, LpStatus, Relation};
use crate::model::{Arc, NodeId, SubstrateNetwork};

use super::{min_cost_flow, FlowNetwork, Infeasible};

/// Subproblems with at most this many LP variables are rerouted with the
/// exact two-commodity LP.
pub const LP_REROUTE_MAX_VARS: usize = 160;

/// A layer endpoint: a node that may emit (or absorb) between `lo` and `hi`
/// units of the commodity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terminal {
    pub node: NodeId,
    pub lo: u64,
    pub hi: u64,
}

impl Terminal {
    pub fn fixed(node: NodeId, amount: u64) -> Self {
        Terminal { node, lo: amount, hi: amount }
    }

    pub fn upto(node: NodeId, cap: u64) -> Self {
        Terminal { node, lo: 0, hi: cap }
    }
}

/// One commodity routed over the substrate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerFlow {
    /// Flow per substrate arc, indexed by `Arc`.
    pub arcs: Vec<u64>,
    /// Amount emitted by each source terminal, in input order.
    pub emitted: Vec<u64>,
    /// Amount absorbed by each sink terminal, in input order.
    pub absorbed: Vec<u64>,
    /// Bandwidth cost in cents.
    pub cost: i64,
}

/// Routes `amount` units from `sources` to `sinks` at minimum bandwidth
/// cost over per-link `residual` capacities.
///
/// Both directions of a link may use its whole residual; opposite flows are
/// cancelled afterwards, so the returned flow respects the shared capacity.
/// Terminal lower bounds are honoured on at most one side: capacity above
/// the lower bounds carries a penalty larger than any rerouting saving, and
/// the result is rejected if a lower bound is still unmet.
pub fn route_layers(
    net: &SubstrateNetwork,
    residual: &[u64],
    beta: i64,
    sources: &[Terminal],
    sinks: &[Terminal],
    amount: u64,
) -> Result<LayerFlow, Infeasible> {
    let n = net.node_count();
    let bounded = |t: &[Terminal]| t.iter().any(|x| x.lo > 0);
    let slack = |t: &[Terminal]| t.iter().any(|x| x.hi > x.lo);
    debug_assert!(
        !(bounded(sources) && slack(sources) && bounded(sinks) && slack(sinks)),
        "lower bounds with slack on both sides"
    );
    let penalty = beta * (n as i64 + 1) + 1;

    let mut g = FlowNetwork::new(n);
    for a in net.arcs() {
        let (from, to) = net.arc_ends(a);
        g.add_arc(from, to, residual[a.link()], beta);
    }
    let s = g.add_node();
    let t = g.add_node();
    // (arc, terminal index) for each terminal arc. Capacity up to a lower
    // bound is free; capacity above it is penalized on a side with bounds.
    let mut terminal_arcs = |list: &[Terminal], outgoing: bool| {
        let extra = if bounded(list) { penalty } else { 0 };
        let mut arcs = Vec::new();
        for (i, x) in list.iter().enumerate() {
            let (from, to) = if outgoing { (s, x.node) } else { (x.node, t) };
            if x.lo > 0 {
                arcs.push((g.add_arc(from, to, x.lo, 0), i));
            }
            if x.hi > x.lo {
                arcs.push((g.add_arc(from, to, x.hi - x.lo, extra), i));
            }
        }
        arcs
    };
    let src_arcs = terminal_arcs(sources, true);
    let sink_arcs = terminal_arcs(sinks, false);
    let r = min_cost_flow(&g, s, t, amount)?;
    let arcs_of = |list: &[(usize, usize)], len: usize| {
        let mut used = vec![0u64; len];
        for &(a, i) in list {
            used[i] += r.flow[a];
        }
        used
    };
    let emitted = arcs_of(&src_arcs, sources.len());
    let absorbed = arcs_of(&sink_arcs, sinks.len());
    let unmet = |list: &[Terminal], used: &[u64]| list.iter().zip(used).any(|(x, &u)| u < x.lo);
    if unmet(sources, &emitted) || unmet(sinks, &absorbed) {
        return Err(Infeasible { max_flow: amount });
    }
    let mut arcs: Vec<u64> = r.flow[..net.arc_count()].to_vec();
    cancel_opposite(&mut arcs);
    let cost = beta * arcs.iter().sum::<u64>() as i64;
    Ok(LayerFlow { arcs, emitted, absorbed, cost })
}

/// Removes flow running both ways over a link.
pub fn cancel_opposite(arcs: &mut [u64]) {
    for l in 0..arcs.len() / 2 {
        let (f, b) = (Arc::forward(l).0, Arc::backward(l).0);
        let common = arcs[f].min(arcs[b]);
        arcs[f] -= common;
        arcs[b] -= common;
    }
}

/// Routes the chain demand from the allocations of one layer to the nodes
/// of the next, each absorbing at most its capacity.
pub fn route_between_layers(
    net: &SubstrateNetwork,
    residual: &[u64],
    beta: i64,
    sources: &[(NodeId, u64)],
    sinks: &[(NodeId, u64)],
    amount: u64,
) -> Result<LayerFlow, Infeasible> {
    let sources: Vec<Terminal> = sources.iter().map(|&(m, z)| Terminal::fixed(m, z)).collect();
    let sinks: Vec<Terminal> = sinks.iter().map(|&(m, cap)| Terminal::upto(m, cap)).collect();
    route_layers(net, residual, beta, &sources, &sinks, amount)
}

/// Rerouting around one layer after its allocations are adjusted.
#[derive(Debug, Clone, Copy)]
pub struct Reroute<'a> {
    pub net: &'a SubstrateNetwork,
    /// Per-link capacity left by every other commodity.
    pub residual: &'a [u64],
    pub beta: i64,
    /// Fixed allocations of the previous layer, feeding the layer.
    pub upstream: &'a [(NodeId, u64)],
    /// Bounds on the layer's new allocations.
    pub layer: &'a [Terminal],
    /// Fixed allocations of the next layer, if traffic already reaches it.
    pub downstream: Option<&'a [(NodeId, u64)]>,
    pub amount: u64,
    pub lp_max_vars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rerouted {
    pub inbound: Vec<u64>,
    pub outbound: Option<Vec<u64>>,
    /// New allocation of each layer terminal, in input order.
    pub allocation: Vec<u64>,
    /// Bandwidth cost of both commodities, in cents.
    pub cost: i64,
}

/// Recomputes the commodity entering a layer and the one leaving it over
/// shared residual capacity.
///
/// Small subproblems are solved as an exact two-commodity LP and accepted
/// when its optimum is integral. Otherwise the two commodities are routed
/// one after the other, in both orders, and the cheaper result is kept.
pub fn reroute_commodities(r: &Reroute<'_>) -> Option<Rerouted> {
    let vars = 2 * r.net.arc_count() + r.layer.len();
    if r.downstream.is_some() && vars <= r.lp_max_vars {
        if let Some(out) = reroute_lp(r) {
            return Some(out);
        }
    }
    let forward = reroute_in_then_out(r);
    let backward = r.downstream.and_then(|_| reroute_out_then_in(r));
    match (forward, backward) {
        (Some(a), Some(b)) => Some(if b.cost < a.cost { b } else { a }),
        (a, b) => a.or(b),
    }
}

fn fixed(list: &[(NodeId, u64)]) -> Vec<Terminal> {
    list.iter().map(|&(m, z)| Terminal::fixed(m, z)).collect()
}

fn take_capacity(residual: &[u64], arcs: &[u64]) -> Vec<u64> {
    residual
        .iter()
        .enumerate()
        .map(|(l, &c)| c - arcs[Arc::forward(l).0] - arcs[Arc::backward(l).0])
        .collect()
}

fn reroute_in_then_out(r: &Reroute<'_>) -> Option<Rerouted> {
    let inbound = route_layers(r.net, r.residual, r.beta, &fixed(r.upstream), r.layer, r.amount).ok()?;
    let allocation = inbound.absorbed.clone();
    let mut cost = inbound.cost;
    let outbound = match r.downstream {
        None => None,
        Some(down) => {
            let left = take_capacity(r.residual, &inbound.arcs);
            let src: Vec<Terminal> =
                r.layer.iter().zip(&allocation).map(|(t, &z)| Terminal::fixed(t.node, z)).collect();
            let out = route_layers(r.net, &left, r.beta, &src, &fixed(down), r.amount).ok()?;
            cost += out.cost;
            Some(out.arcs)
        }
    };
    Some(Rerouted { inbound: inbound.arcs, outbound, allocation, cost })
}

fn reroute_out_then_in(r: &Reroute<'_>) -> Option<Rerouted> {
    let down = r.downstream?;
    let outbound = route_layers(r.net, r.residual, r.beta, r.layer, &fixed(down), r.amount).ok()?;
    let allocation = outbound.emitted.clone();
    let left = take_capacity(r.residual, &outbound.arcs);
    let sinks: Vec<Terminal> =
        r.layer.iter().zip(&allocation).map(|(t, &z)| Terminal::fixed(t.node, z)).collect();
    let inbound = route_layers(r.net, &left, r.beta, &fixed(r.upstream), &sinks, r.amount).ok()?;
    let cost = inbound.cost + outbound.cost;
    Some(Rerouted { inbound: inbound.arcs, outbound: Some(outbound.arcs), allocation, cost })
}

/// Exact two-commodity LP; `None` when infeasible or fractional.
fn reroute_lp(r: &Reroute<'_>) -> Option<Rerouted> {
    let down = r.downstream?;
    let net = r.net;
    let n = net.node_count();
    let mut lp = LinearProgram::new();
    let beta = r.beta as f64;
    let xin: Vec<usize> = net
        .arcs()
        .map(|a| lp.add_var(format!("in[{}]", a.0), 0.0, r.residual[a.link()] as f64, beta))
        .collect();
    let xout: Vec<usize> = net
        .arcs()
        .map(|a| lp.add_var(format!("out[{}]", a.0), 0.0, r.residual[a.link()] as f64, beta))
        .collect();
    let z: Vec<usize> = r
        .layer
        .iter()
        .map(|t| lp.add_var(format!("z[{}]", t.node), t.lo as f64, t.hi as f64, 0.0))
        .collect();
    for l in 0..net.link_count() {
        let (f, b) = (Arc::forward(l).0, Arc::backward(l).0);
        lp.add_row(
            format!("link[{l}]"),
            vec![(xin[f], 1.0), (xin[b], 1.0), (xout[f], 1.0), (xout[b], 1.0)],
            Relation::Le,
            r.residual[l] as f64,
        );
    }
    lp.add_row("total", z.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, r.amount as f64);
    let mut supply = vec![0.0; n];
    let mut demand = vec![0.0; n];
    for &(m, v) in r.upstream {
        supply[m] += v as f64;
    }
    for &(m, v) in down {
        demand[m] += v as f64;
    }
    for m in 0..n {
        // out - in = supply - z  and  out - in = z - demand.
        let mut cin = Vec::new();
        let mut cout = Vec::new();
        for a in net.arcs() {
            let (from, to) = net.arc_ends(a);
            if from == m {
                cin.push((xin[a.0], 1.0));
                cout.push((xout[a.0], 1.0));
            } else if to == m {
                cin.push((xin[a.0], -1.0));
                cout.push((xout[a.0], -1.0));
            }
        }
        for (k, t) in r.layer.iter().enumerate() {
            if t.node == m {
                cin.push((z[k], 1.0));
                cout.push((z[k], -1.0));
            }
        }
        lp.add_row(format!("in[{m}]"), cin, Relation::Eq, supply[m]);
        lp.add_row(format!("out[{m}]"), cout, Relation::Eq, -demand[m]);
    }
    let sol = solve_lp(&lp).ok()?;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let integral = |j: usize| {
        let v = sol.values[j];
        (v - v.round()).abs() <= 1e-6
    };
    if !(0..lp.var_count()).all(integral) {
        return None;
    }
    let round = |ids: &[usize]| -> Vec<u64> { ids.iter().map(|&j| sol.values[j].round() as u64).collect() };
    let mut inbound = round(&xin);
    let mut outbound = round(&xout);
    cancel_opposite(&mut inbound);
    cancel_opposite(&mut outbound);
    let cost = r.beta * (inbound.iter().sum::<u64>() + outbound.iter().sum::<u64>()) as i64;
    Some(Rerouted { inbound, outbound: Some(outbound), allocation: round(&z), cost })
}
