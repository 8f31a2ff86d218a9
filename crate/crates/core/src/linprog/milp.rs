use crate::model::{
    Arc, Chain, ChainRequest, Cost, CostBreakdown, CostModel, Deployment, NodeId, Problem,
    SubstrateNetwork, VnfCatalog,
};

use super::bnb::INTEGRALITY_TOL;
use super::{branch_and_bound, LinearProgram, LinprogError, MilpStatus, Relation, SolveLimits, VarId};

/// The placement model as a mixed-integer program.
///
/// Costs are expressed in cents so that the objective of an integral
/// solution is an integer.
#[derive(Debug, Clone)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    pub integer: Vec<VarId>,
    pub gamma: f64,
    pub chain: Chain,
    /// `y[m][s][u]`: instances of VNF type `u` of stage `s` on node `m`.
    pub y: Vec<Vec<Vec<VarId>>>,
    /// `z[m][s]`: throughput of stage `s` allocated on node `m`.
    pub z: Vec<Vec<VarId>>,
    /// `x[c][arc]`: traffic of commodity `c` on a directed arc.
    pub x: Vec<Vec<VarId>>,
    pub unit_cost: Vec<Vec<Cost>>,
    pub beta: Cost,
    arc_ends: Vec<(NodeId, NodeId)>,
}

pub fn build_milp(
    net: &SubstrateNetwork,
    req: &ChainRequest,
    cat: &VnfCatalog,
    cost: &CostModel,
    gamma: Option<f64>,
) -> Result<MilpProblem, LinprogError> {
    let problem = Problem::new(net, req, cat, cost)?;
    MilpProblem::from_problem(&problem, gamma)
}

impl MilpProblem {
    pub fn from_problem(problem: &Problem<'_>, gamma: Option<f64>) -> Result<Self, LinprogError> {
        Self::build(problem, gamma, true)
    }

    /// The bare model without the per-stage cover inequalities.
    pub fn unstrengthened(problem: &Problem<'_>, gamma: Option<f64>) -> Result<Self, LinprogError> {
        Self::build(problem, gamma, false)
    }

    fn build(problem: &Problem<'_>, gamma: Option<f64>, strengthen: bool) -> Result<Self, LinprogError> {
        let net = problem.net;
        let chain = problem.chain.clone();
        let demand = chain.demand as f64;
        let gamma = gamma.unwrap_or(demand);
        if !(gamma >= demand) {
            return Err(LinprogError::GammaTooSmall { gamma, bound: demand });
        }
        let n = net.node_count();
        let stages = chain.stages.len();
        let target = chain.target_stage();
        let beta = problem.beta.cents() as f64;
        let mut lp = LinearProgram::new();
        let mut integer = Vec::new();

        // Instance counts, bounded by what fits on an empty node.
        let mut y = vec![Vec::with_capacity(stages); n];
        let mut installable = vec![vec![0.0; stages]; n];
        for (m, ym) in y.iter_mut().enumerate() {
            let cap = &net.node(m).capacity;
            for (s, stage) in chain.stages.iter().enumerate() {
                let mut row = Vec::with_capacity(stage.vnfs.len());
                for (u, v) in stage.vnfs.iter().enumerate() {
                    let bound = if chain.is_function(s) {
                        v.demand
                            .iter()
                            .zip(cap)
                            .filter(|(d, _)| d.milli() > 0)
                            .map(|(d, c)| (c.milli().max(0) / d.milli()) as f64)
                            .fold(f64::INFINITY, f64::min)
                    } else if (s == 0 && m == chain.source) || (s == target && m == chain.target) {
                        1.0
                    } else {
                        0.0
                    };
                    let (lo, hi) = if chain.is_function(s) { (0.0, bound) } else { (bound, bound) };
                    installable[m][s] += hi * v.mbps as f64;
                    let id = lp.add_var(format!("y[{m},{s},{u}]"), lo, hi, problem.unit_cost[s][u].cents() as f64);
                    integer.push(id);
                    row.push(id);
                }
                ym.push(row);
            }
        }

        let z: Vec<Vec<VarId>> = (0..n)
            .map(|m| {
                (0..stages)
                    .map(|s| lp.add_var(format!("z[{m},{s}]"), 0.0, installable[m][s].min(demand), 0.0))
                    .collect()
            })
            .collect();

        let x: Vec<Vec<VarId>> = (0..chain.commodity_count())
            .map(|c| {
                net.arcs()
                    .map(|a| lp.add_var(format!("x[{c},{}]", a.0), 0.0, net.link(a.link()).mbps as f64, beta))
                    .collect()
            })
            .collect();

        // Node capacity.
        for m in 0..n {
            for (r, cap) in net.node(m).capacity.iter().enumerate() {
                let coeffs: Vec<(VarId, f64)> = chain
                    .stages
                    .iter()
                    .enumerate()
                    .flat_map(|(s, st)| st.vnfs.iter().enumerate().map(move |(u, v)| (s, u, v.demand[r].milli())))
                    .filter(|&(_, _, d)| d != 0)
                    .map(|(s, u, d)| (y[m][s][u], d as f64))
                    .collect();
                if !coeffs.is_empty() {
                    lp.add_row(format!("cap[{m},{r}]"), coeffs, Relation::Le, cap.milli() as f64);
                }
            }
        }
        // Endpoint location.
        lp.add_row("loc[s]", vec![(y[chain.source][0][0], 1.0)], Relation::Eq, 1.0);
        lp.add_row("loc[t]", vec![(y[chain.target][target][0], 1.0)], Relation::Eq, 1.0);
        // Link capacity over both directions.
        for (l, link) in net.links().iter().enumerate() {
            let coeffs = x
                .iter()
                .flat_map(|xc| [(xc[Arc::forward(l).0], 1.0), (xc[Arc::backward(l).0], 1.0)])
                .collect();
            lp.add_row(format!("link[{l}]"), coeffs, Relation::Le, link.mbps as f64);
        }
        // Allocated throughput within installed throughput.
        for m in 0..n {
            for (s, stage) in chain.stages.iter().enumerate() {
                let mut coeffs: Vec<(VarId, f64)> =
                    stage.vnfs.iter().enumerate().map(|(u, v)| (y[m][s][u], v.mbps as f64)).collect();
                coeffs.push((z[m][s], -1.0));
                lp.add_row(format!("thr[{m},{s}]"), coeffs, Relation::Ge, 0.0);
            }
        }
        // Every stage allocates the whole demand.
        for s in 0..stages {
            let coeffs = (0..n).map(|m| (z[m][s], 1.0)).collect();
            lp.add_row(format!("dem[{s}]"), coeffs, Relation::Eq, demand);
        }
        // Flow conservation: out - in = z(c) - z(c + 1).
        let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for a in net.arcs() {
            let (from, to) = net.arc_ends(a);
            incident[from].push((a.0, 1.0));
            incident[to].push((a.0, -1.0));
        }
        for (c, xc) in x.iter().enumerate() {
            for m in 0..n {
                let mut coeffs: Vec<(VarId, f64)> = incident[m].iter().map(|&(a, sign)| (xc[a], sign)).collect();
                coeffs.push((z[m][c], -1.0));
                coeffs.push((z[m][c + 1], 1.0));
                lp.add_row(format!("flow[{c},{m}]"), coeffs, Relation::Eq, 0.0);
            }
        }

        if strengthen {
            // Whatever the placement, a stage's instances must together
            // cover the demand, so their host cost is at least the cheapest
            // integral cover.
            for s in chain.function_stages() {
                let floor = cheapest_cover(&chain.stages[s].vnfs.iter().map(|v| v.mbps).collect::<Vec<_>>(), &problem.unit_cost[s], chain.demand);
                if floor > 0 {
                    let coeffs = (0..n)
                        .flat_map(|m| y[m][s].iter().enumerate().map(move |(u, &j)| (j, u)))
                        .map(|(j, u)| (j, problem.unit_cost[s][u].cents() as f64))
                        .filter(|&(_, c)| c != 0.0)
                        .collect();
                    lp.add_row(format!("cover[{s}]"), coeffs, Relation::Ge, floor as f64);
                }
            }
        }

        Ok(MilpProblem {
            lp,
            integer,
            gamma,
            chain,
            y,
            z,
            x,
            unit_cost: problem.unit_cost.clone(),
            beta: problem.beta,
            arc_ends: net.arcs().map(|a| net.arc_ends(a)).collect(),
        })
    }

    pub fn y_count(&self) -> usize {
        self.y.iter().flatten().map(Vec::len).sum()
    }

    pub fn z_count(&self) -> usize {
        self.z.iter().map(Vec::len).sum()
    }

    pub fn x_count(&self) -> usize {
        self.x.iter().map(Vec::len).sum()
    }

    pub fn node_count(&self) -> usize {
        self.y.len()
    }

    /// Values encoding `dep`, with the endpoint pseudo-VNFs filled in.
    pub fn encode(&self, dep: &Deployment) -> Vec<f64> {
        let mut values = vec![0.0; self.lp.var_count()];
        let target = self.chain.target_stage();
        values[self.y[self.chain.source][0][0]] = 1.0;
        values[self.y[self.chain.target][target][0]] = 1.0;
        values[self.z[self.chain.source][0]] = self.chain.demand as f64;
        values[self.z[self.chain.target][target]] = self.chain.demand as f64;
        for (k, &cnt) in &dep.instances {
            values[self.y[k.node][k.stage][k.vnf]] += cnt as f64;
        }
        for (&(m, s), &v) in &dep.allocations {
            values[self.z[m][s]] += v as f64;
        }
        for (&(c, a), &v) in &dep.flows {
            values[self.x[c][a.0]] += v as f64;
        }
        values
    }

    pub fn cost_of(&self, dep: &Deployment) -> CostBreakdown {
        let hops: u64 = dep.flows.values().sum();
        let bandwidth = self.beta * hops as i64;
        let host = dep.instances.iter().map(|(k, &c)| self.unit_cost[k.stage][k.vnf] * c as i64).sum();
        CostBreakdown { bandwidth, host, total: bandwidth + host }
    }

    fn is_integral(&self, values: &[f64], vars: impl Iterator<Item = VarId>) -> bool {
        vars.into_iter().all(|j| (values[j] - values[j].round()).abs() <= INTEGRALITY_TOL)
    }

    fn decode(&self, values: &[f64]) -> Deployment {
        let mut dep = Deployment::new();
        for m in 0..self.node_count() {
            for s in self.chain.function_stages() {
                for (u, &j) in self.y[m][s].iter().enumerate() {
                    dep.add_instances(m, s, u, values[j].round().max(0.0) as u32);
                }
                dep.add_allocation(m, s, values[self.z[m][s]].round().max(0.0) as u64);
            }
        }
        for (c, xc) in self.x.iter().enumerate() {
            for (a, &j) in xc.iter().enumerate() {
                dep.add_flow(c, Arc(a), values[j].round().max(0.0) as u64);
            }
        }
        dep
    }

    /// Endpoints of each directed arc, indexed like `x[c]`.
    pub fn arc_ends(&self) -> &[(NodeId, NodeId)] {
        &self.arc_ends
    }
}

/// Cheapest integral combination of instances (unbounded counts) whose
/// throughputs add up to at least `demand`, in cents.
fn cheapest_cover(mbps: &[u64], cost: &[Cost], demand: u64) -> i64 {
    let demand = demand as usize;
    let mut best = vec![i64::MAX; demand + 1];
    best[0] = 0;
    for t in 1..=demand {
        for (&q, c) in mbps.iter().zip(cost) {
            let rest = best[t.saturating_sub(q as usize)];
            if rest != i64::MAX {
                best[t] = best[t].min(rest + c.cents());
            }
        }
    }
    best[demand]
}

/// Maps a solution vector back to a deployment.
///
/// Instance counts must be integral within `1e-6`. Flows and allocations
/// are rounded when they are equally close to integers; otherwise the
/// instances are fixed and an integral flow is searched for.
pub fn extract_deployment(p: &MilpProblem, values: &[f64]) -> Result<Deployment, LinprogError> {
    if values.len() != p.lp.var_count() {
        return Err(LinprogError::Malformed("value vector length differs from variable count".into()));
    }
    for &j in &p.integer {
        if (values[j] - values[j].round()).abs() > INTEGRALITY_TOL {
            return Err(LinprogError::Fractional { name: p.lp.vars[j].name.clone(), value: values[j] });
        }
    }
    let continuous = p.z.iter().flatten().chain(p.x.iter().flatten()).copied();
    if p.is_integral(values, continuous) {
        return Ok(p.decode(values));
    }

    let mut lp = p.lp.clone();
    for &j in &p.integer {
        let v = values[j].round();
        lp.vars[j].lower = v;
        lp.vars[j].upper = v;
    }
    let flows: Vec<VarId> = p.z.iter().flatten().chain(p.x.iter().flatten()).copied().collect();
    let out = branch_and_bound(&lp, &flows, SolveLimits::unlimited())?;
    match out.incumbent {
        Some(v) => Ok(p.decode(&v)),
        None => Err(LinprogError::NoIntegralFlow),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub status: MilpStatus,
    /// Extracted incumbent; absent when none was found or when no integral
    /// flow realizes it.
    pub deployment: Option<Deployment>,
    pub cost: Option<CostBreakdown>,
    /// Incumbent objective of the program itself.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    /// Optimum of the linear relaxation.
    pub relaxation: f64,
    pub nodes: usize,
}

impl ExactResult {
    pub fn accepted(&self) -> bool {
        self.deployment.is_some()
    }
}

pub fn solve_milp(p: &MilpProblem, limits: SolveLimits) -> Result<ExactResult, LinprogError> {
    let out = branch_and_bound(&p.lp, &p.integer, limits)?;
    let to_units = |cents: f64| cents / Cost::SCALE as f64;
    let mut result = ExactResult {
        status: out.status,
        deployment: None,
        cost: None,
        objective: to_units(out.objective),
        bound: to_units(out.bound),
        relaxation: to_units(out.root_bound),
        nodes: out.nodes,
    };
    if let Some(values) = &out.incumbent {
        match extract_deployment(p, values) {
            Ok(dep) => {
                result.cost = Some(p.cost_of(&dep));
                result.deployment = Some(dep);
            }
            Err(LinprogError::NoIntegralFlow) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(result)
}

/// Builds and solves in one step.
pub fn solve_problem(problem: &Problem<'_>, limits: SolveLimits) -> Result<ExactResult, LinprogError> {
    solve_milp(&MilpProblem::from_problem(problem, None)?, limits)
}
