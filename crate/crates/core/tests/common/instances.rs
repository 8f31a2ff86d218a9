use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem as Lp};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sfc_core::model::{
    Arc, ChainRequest, CostModel, Link, Node, Problem, Quantity, SubstrateNetwork, VnfCatalog, VnfType,
};

pub struct Instance {
    pub net: SubstrateNetwork,
    pub cat: VnfCatalog,
    pub req: ChainRequest,
    pub cost: CostModel,
}

impl Instance {
    pub fn problem(&self) -> Problem<'_> {
        Problem::new(&self.net, &self.req, &self.cat, &self.cost).expect("generated instance is valid")
    }
}

/// At most eight nodes, two to four of them hosts and the rest zero-capacity
/// switches, a chain of one or two functions with up to three VNF types
/// each, and a demand of at most 300 Mbps.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(3..=8);
    let memory = rng.random_bool(0.3);
    let kinds: Vec<String> = if memory { vec!["cpu".into(), "memory".into()] } else { vec!["cpu".into()] };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let host_count = rng.random_range(2..=n.min(4));
    let nodes: Vec<Node> = (0..n)
        .map(|m| {
            let host = order[..host_count].contains(&m);
            let mut capacity = vec![Quantity::ZERO; kinds.len()];
            if host {
                capacity[0] = Quantity::from_units(rng.random_range(2..=8));
                if memory {
                    capacity[1] = Quantity::from_units(rng.random_range(0..=16));
                }
            }
            Node { id: format!("n{m}"), capacity }
        })
        .collect();
    let mut pairs = Vec::new();
    for m in 1..n {
        pairs.push((rng.random_range(0..m), m));
    }
    for _ in 0..rng.random_range(0..=n / 2 + 1) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !pairs.contains(&(a, b)) && !pairs.contains(&(b, a)) {
            pairs.push((a, b));
        }
    }
    let links = pairs.iter().map(|&(a, b)| Link { a, b, mbps: rng.random_range(5..=60) * 10 }).collect();
    let net = SubstrateNetwork::new(kinds, nodes, links).expect("generated network is valid");

    let len = rng.random_range(1..=2);
    let mut cat = VnfCatalog::new();
    let mut sfs = Vec::new();
    for f in 0..len {
        let types = (0..rng.random_range(1..=3))
            .map(|t| {
                let cpu = rng.random_range(1..=3) as f64;
                let mbps = rng.random_range(4..=30) * 10;
                if memory {
                    VnfType::new(&format!("v{f}{t}"), mbps, &[("cpu", cpu), ("memory", rng.random_range(0..=8) as f64)])
                } else {
                    VnfType::new(&format!("v{f}{t}"), mbps, &[("cpu", cpu)])
                }
            })
            .collect();
        cat = cat.with(&format!("f{f}"), types);
        sfs.push(format!("f{f}"));
    }
    let s = rng.random_range(0..n);
    let t = (s + rng.random_range(1..n)) % n;
    let sfs: Vec<&str> = sfs.iter().map(String::as_str).collect();
    let req = ChainRequest::new(&sfs, &format!("n{s}"), &format!("n{t}"), rng.random_range(5..=30) * 10);
    let cost = if memory { CostModel::new(&[("cpu", 1.0), ("memory", 0.1)], 0.01) } else { CostModel::default() };
    Instance { net, cat, req, cost }
}

/// Minimum of host cost plus bandwidth cost, with instance counts integral
/// and flows and allocations continuous, or `None` if infeasible.
///
/// Every node's instance mix is enumerated. Mixes where one instance could
/// be dropped without losing the ability to serve the whole demand are
/// skipped, as are mixes dominated in both capacity and price; every
/// surviving combination is priced with a flow LP.
pub fn brute_force(p: &Problem<'_>) -> Option<f64> {
    let chain = &p.chain;
    let demand = chain.demand;
    let stages: Vec<usize> = chain.function_stages().collect();
    let n = p.net.node_count();

    // Per node: Pareto set of (capacity per function stage, host cost).
    let mut options: Vec<Vec<(Vec<u64>, f64)>> = Vec::new();
    for m in 0..n {
        let mut best: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        let pairs: Vec<(usize, usize)> =
            stages.iter().flat_map(|&u| (0..chain.stages[u].vnfs.len()).map(move |t| (u, t))).collect();
        let mut counts = vec![0u64; pairs.len()];
        enumerate_mixes(p, m, &pairs, 0, &mut counts, &mut |counts| {
            let mut caps = vec![0u64; stages.len()];
            let mut cost = 0.0;
            for (i, &(u, t)) in pairs.iter().enumerate() {
                caps[u - 1] += counts[i] * chain.stages[u].vnfs[t].mbps;
                cost += counts[i] as f64 * p.unit_cost[u][t].as_f64();
            }
            let qmax = |u: usize| chain.stages[u].vnfs.iter().map(|v| v.mbps).max().unwrap();
            if stages.iter().any(|&u| caps[u - 1] >= demand + qmax(u)) {
                return;
            }
            let caps: Vec<u64> = caps.iter().map(|&c| c.min(demand)).collect();
            let e = best.entry(caps).or_insert(f64::INFINITY);
            *e = e.min(cost);
        });
        let all: Vec<(Vec<u64>, f64)> = best.into_iter().collect();
        let pareto = all
            .iter()
            .filter(|(c, k)| {
                !all.iter().any(|(c2, k2)| {
                    (c2 != c || k2 < k) && c2.iter().zip(c.iter()).all(|(a, b)| a >= b) && k2 <= k
                })
            })
            .cloned()
            .collect();
        options.push(pareto);
    }
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; n];
    combine(p, &options, 0, &mut pick, 0.0, &mut best);
    best.is_finite().then_some(best)
}

fn enumerate_mixes(
    p: &Problem<'_>,
    m: usize,
    pairs: &[(usize, usize)],
    i: usize,
    counts: &mut Vec<u64>,
    visit: &mut dyn FnMut(&[u64]),
) {
    let cap = &p.net.node(m).capacity;
    let fits = |counts: &[u64]| {
        (0..cap.len()).all(|r| {
            let used: i64 = pairs
                .iter()
                .zip(counts)
                .map(|(&(u, t), &c)| p.chain.stages[u].vnfs[t].demand[r].milli() * c as i64)
                .sum();
            used <= cap[r].milli()
        })
    };
    if i == pairs.len() {
        visit(counts);
        return;
    }
    loop {
        enumerate_mixes(p, m, pairs, i + 1, counts, visit);
        counts[i] += 1;
        if !fits(counts) || counts[i] > 64 {
            counts[i] = 0;
            return;
        }
    }
}

fn combine(p: &Problem<'_>, options: &[Vec<(Vec<u64>, f64)>], m: usize, pick: &mut Vec<usize>, host: f64, best: &mut f64) {
    if host >= *best - 1e-9 {
        return;
    }
    let k = p.chain.len();
    if m == options.len() {
        let caps: Vec<&Vec<u64>> = options.iter().zip(pick.iter()).map(|(o, &i)| &o[i].0).collect();
        if (0..k).any(|u| caps.iter().map(|c| c[u]).sum::<u64>() < p.chain.demand) {
            return;
        }
        if let Some(bw) = flow_lp(p, &caps) {
            *best = best.min(host + bw);
        }
        return;
    }
    for i in 0..options[m].len() {
        pick[m] = i;
        combine(p, options, m + 1, pick, host + options[m][i].1, best);
    }
}

/// Cheapest bandwidth for fixed per-node stage capacities.
fn flow_lp(p: &Problem<'_>, caps: &[&Vec<u64>]) -> Option<f64> {
    let net = p.net;
    let chain = &p.chain;
    let k = chain.len();
    let demand = chain.demand as f64;
    let beta = p.beta.as_f64();
    let mut lp = Lp::new(OptimizationDirection::Minimize);
    let x: Vec<Vec<_>> = (0..=k)
        .map(|_| net.arcs().map(|a| lp.add_var(beta, (0.0, net.link(a.link()).mbps as f64))).collect())
        .collect();
    let z: Vec<Vec<_>> = (0..net.node_count())
        .map(|m| (0..k).map(|u| lp.add_var(0.0, (0.0, caps[m][u] as f64))).collect())
        .collect();
    for u in 0..k {
        let terms: Vec<_> = (0..net.node_count()).map(|m| (z[m][u], 1.0)).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, demand);
    }
    for l in 0..net.link_count() {
        let terms: Vec<_> =
            (0..=k).flat_map(|c| [(x[c][Arc::forward(l).0], 1.0), (x[c][Arc::backward(l).0], 1.0)]).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Le, net.link(l).mbps as f64);
    }
    for c in 0..=k {
        for m in 0..net.node_count() {
            // out - in - z(m, c) + z(m, c + 1) = 0, endpoints as constants.
            let mut terms = Vec::new();
            let mut rhs = 0.0;
            for a in net.arcs() {
                let (from, to) = net.arc_ends(a);
                if from == m {
                    terms.push((x[c][a.0], 1.0));
                } else if to == m {
                    terms.push((x[c][a.0], -1.0));
                }
            }
            if c == 0 {
                if m == chain.source {
                    rhs += demand;
                }
            } else {
                terms.push((z[m][c - 1], -1.0));
            }
            if c == k {
                if m == chain.target {
                    rhs -= demand;
                }
            } else {
                terms.push((z[m][c], 1.0));
            }
            lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, rhs);
        }
    }
    let sol = lp.solve().ok()?.into_solution().ok()?;
    Some(sol.objective())
}
