use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sfc_core::flow::FlowNetwork;
use sfc_core::linprog::{solve_lp, LinearProgram, LpStatus, Relation};

pub fn random_graph(rng: &mut ChaCha8Rng) -> FlowNetwork {
    let n = rng.random_range(2..=8);
    let mut g = FlowNetwork::new(n);
    let arcs = rng.random_range(n..=4 * n);
    for _ in 0..arcs {
        let from = rng.random_range(0..n);
        let to = rng.random_range(0..n);
        if from != to {
            g.add_arc(from, to, rng.random_range(0..=50), rng.random_range(0..=9));
        }
    }
    g
}

/// Minimum cost of sending `amount` as a linear program, or `None`.
pub fn lp_min_cost(g: &FlowNetwork, source: usize, sink: usize, amount: u64) -> Option<f64> {
    let mut lp = LinearProgram::new();
    let vars: Vec<usize> = g
        .arcs()
        .iter()
        .enumerate()
        .map(|(k, a)| lp.add_var(format!("f{k}"), 0.0, a.capacity as f64, a.cost as f64))
        .collect();
    for v in 0..g.node_count() {
        let mut coeffs = Vec::new();
        for (k, a) in g.arcs().iter().enumerate() {
            if a.from == v {
                coeffs.push((vars[k], 1.0));
            }
            if a.to == v {
                coeffs.push((vars[k], -1.0));
            }
        }
        let rhs = if v == source {
            amount as f64
        } else if v == sink {
            -(amount as f64)
        } else {
            0.0
        };
        lp.add_row(format!("n{v}"), coeffs, Relation::Eq, rhs);
    }
    let sol = solve_lp(&lp).unwrap();
    (sol.status == LpStatus::Optimal).then_some(sol.objective)
}

/// Same program as [`lp_min_cost`], solved by an external LP solver.
pub fn reference_min_cost(g: &FlowNetwork, source: usize, sink: usize, amount: u64) -> Option<f64> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = g.arcs().iter().map(|a| lp.add_var(a.cost as f64, (0.0, a.capacity as f64))).collect();
    for v in 0..g.node_count() {
        let mut terms = Vec::new();
        for (k, a) in g.arcs().iter().enumerate() {
            if a.from == v {
                terms.push((vars[k], 1.0));
            }
            if a.to == v {
                terms.push((vars[k], -1.0));
            }
        }
        let rhs = match v {
            _ if v == source => amount as f64,
            _ if v == sink => -(amount as f64),
            _ => 0.0,
        };
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, rhs);
    }
    Some(lp.solve().ok()?.into_solution().ok()?.objective())
}
