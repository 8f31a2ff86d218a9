use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{chain_template, default_catalog, generate_fat_tree, generate_workload, hosts, EventKind, HostProfile};
use crate::kariz::{deploy_problem, ImproveLog, KarizConfig};
use crate::linprog::{solve_problem, SolveLimits};
use crate::model::{
    check_deployment, ChainRequest, CostModel, Deployment, DeploymentView, InputError, Problem, Quantity, SubstrateNetwork,
    VnfCatalog,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    FatTree {
        k: usize,
        #[serde(default = "default_cores")]
        host_cores: i64,
        #[serde(default = "default_link")]
        link_mbps: u64,
    },
    NetworkFile(PathBuf),
}

fn default_cores() -> i64 {
    8
}

fn default_link() -> u64 {
    1000
}

impl TopologySpec {
    pub fn build(&self) -> Result<SubstrateNetwork, InputError> {
        match self {
            TopologySpec::FatTree { k, host_cores, link_mbps } => {
                let profile = HostProfile { kinds: vec!["cpu".into()], capacity: vec![Quantity::from_units(*host_cores)] };
                generate_fat_tree(*k, &profile, *link_mbps)
            }
            TopologySpec::NetworkFile(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| InputError::Parse(format!("{}: {e}", path.display())))?;
                SubstrateNetwork::from_json(&text)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Kariz,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    /// Defaults to the evaluation's VNF table.
    #[serde(default = "default_catalog")]
    pub catalog: VnfCatalog,
    /// Service functions in chain order; defaults to `Len-chain_length`.
    #[serde(default)]
    pub chain: Option<Vec<String>>,
    #[serde(default = "default_length")]
    pub chain_length: usize,
    pub demand: u64,
    /// Chains per second.
    #[serde(default = "default_rate")]
    pub arrival_rate: f64,
    /// Seconds.
    #[serde(default = "default_lifetime")]
    pub mean_lifetime: f64,
    #[serde(default = "default_count")]
    pub chains: usize,
    #[serde(default)]
    pub seed: u64,
    pub solver: SolverKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub cost: CostModel,
    /// Branch-and-bound node budget per chain for the exact solver.
    #[serde(default = "default_nodes")]
    pub exact_node_limit: usize,
}

fn default_length() -> usize {
    1
}
fn default_rate() -> f64 {
    0.01
}
fn default_lifetime() -> f64 {
    10_800.0
}
fn default_count() -> usize {
    200
}
fn default_epsilon() -> f64 {
    20.0
}
fn default_nodes() -> usize {
    5_000
}

impl ExperimentConfig {
    /// Desk-scale defaults: 4-ary fat-tree, 200 chains, one chain per 100 s
    /// living three hours on average.
    pub fn desk(chain_length: usize, demand: u64, solver: SolverKind, seed: u64) -> Self {
        ExperimentConfig {
            topology: TopologySpec::FatTree { k: 4, host_cores: 8, link_mbps: 1000 },
            catalog: default_catalog(),
            chain: None,
            chain_length,
            demand,
            arrival_rate: default_rate(),
            mean_lifetime: default_lifetime(),
            chains: default_count(),
            seed,
            solver,
            epsilon: default_epsilon(),
            cost: CostModel::default(),
            exact_node_limit: default_nodes(),
        }
    }

    pub fn functions(&self) -> Result<Vec<String>, InputError> {
        match &self.chain {
            Some(sfs) => Ok(sfs.clone()),
            None => chain_template(self.chain_length)
                .ok_or_else(|| InputError::Parse(format!("no chain template of length {}", self.chain_length))),
        }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |msg: String| Err(InputError::Parse(msg));
        if let TopologySpec::FatTree { k, .. } = self.topology {
            if k < 2 || k % 2 != 0 {
                return bad(format!("fat-tree arity must be even and at least 2, got {k}"));
            }
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return bad(format!("arrival rate must be positive, got {}", self.arrival_rate));
        }
        if !(self.mean_lifetime > 0.0 && self.mean_lifetime.is_finite()) {
            return bad(format!("mean lifetime must be positive, got {}", self.mean_lifetime));
        }
        if self.chains == 0 {
            return bad("chain count must be at least 1".into());
        }
        if self.demand == 0 {
            return Err(InputError::InvalidDemand(0));
        }
        KarizConfig::with_epsilon(self.epsilon).validate()?;
        self.cost.validate()?;
        self.functions().map(|_| ())
    }
}

/// One row of the per-chain log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRecord {
    pub id: usize,
    pub arrival_t: f64,
    pub lifetime: f64,
    pub length: usize,
    pub demand: u64,
    pub accepted: bool,
    pub bw_cost: f64,
    pub host_cost: f64,
    pub total_cost: f64,
    #[serde(skip)]
    pub reason: Option<String>,
    /// Allocated over installed throughput per function, accepted chains only.
    #[serde(skip)]
    pub vnf_utilization: Vec<f64>,
    #[serde(skip)]
    pub request: ChainRequest,
    /// Deployment committed for an accepted chain.
    #[serde(skip)]
    pub deployment: Option<DeploymentView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub chains: usize,
    pub accepted: usize,
    pub acceptance_ratio: f64,
    pub bandwidth_utilization: f64,
    pub cpu_utilization: f64,
    /// Per function name, mean over accepted chains.
    pub vnf_utilization: BTreeMap<String, f64>,
    pub mean_bw_cost: f64,
    pub mean_host_cost: f64,
    pub mean_total_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMetrics {
    pub summary: Summary,
    pub records: Vec<ChainRecord>,
    /// Every improvement round of every Kariz call.
    pub improve_logs: Vec<ImproveLog>,
    /// Link and CPU utilization sampled right after each arrival.
    pub samples: Vec<(f64, f64)>,
    /// Whether committed plus residual equalled the initial capacity at every
    /// event and the network was pristine again at the end.
    pub conserved: bool,
}

/// Resources a committed chain holds, released verbatim on departure.
#[derive(Debug, Clone)]
struct Hold {
    nodes: Vec<(usize, Vec<Quantity>)>,
    links: Vec<(usize, u64)>,
}

fn hold_of(problem: &Problem<'_>, dep: &Deployment) -> Hold {
    let net = problem.net;
    let kinds = net.resource_kinds().len();
    let mut nodes: BTreeMap<usize, Vec<Quantity>> = BTreeMap::new();
    for (k, &count) in &dep.instances {
        let use_ = nodes.entry(k.node).or_insert_with(|| vec![Quantity::ZERO; kinds]);
        for (u, d) in use_.iter_mut().zip(&problem.chain.stages[k.stage].vnfs[k.vnf].demand) {
            *u += *d * count as i64;
        }
    }
    let mut links: BTreeMap<usize, u64> = BTreeMap::new();
    for (&(_, arc), &v) in &dep.flows {
        *links.entry(arc.link()).or_default() += v;
    }
    Hold { nodes: nodes.into_iter().collect(), links: links.into_iter().collect() }
}

/// Summary recomputed from per-chain records and utilization samples.
pub fn summarize(records: &[ChainRecord], samples: &[(f64, f64)], functions: &[String]) -> Summary {
    let accepted: Vec<&ChainRecord> = records.iter().filter(|r| r.accepted).collect();
    let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| if n == 0 { 0.0 } else { xs.sum::<f64>() / n as f64 };
    let a = accepted.len();
    Summary {
        chains: records.len(),
        accepted: a,
        acceptance_ratio: if records.is_empty() { 0.0 } else { a as f64 / records.len() as f64 },
        bandwidth_utilization: mean(&mut samples.iter().map(|s| s.0), samples.len()),
        cpu_utilization: mean(&mut samples.iter().map(|s| s.1), samples.len()),
        vnf_utilization: functions
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), mean(&mut accepted.iter().map(|r| r.vnf_utilization[i]), a)))
            .collect(),
        mean_bw_cost: mean(&mut accepted.iter().map(|r| r.bw_cost), a),
        mean_host_cost: mean(&mut accepted.iter().map(|r| r.host_cost), a),
        mean_total_cost: mean(&mut accepted.iter().map(|r| r.total_cost), a),
    }
}

/// Replays a seeded workload against one solver.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentMetrics, InputError> {
    cfg.validate()?;
    let pristine = cfg.topology.build()?;
    let functions = cfg.functions()?;
    let sfs: Vec<&str> = functions.iter().map(String::as_str).collect();
    let host_nodes = hosts(&pristine);
    if host_nodes.len() < 2 {
        return Err(InputError::Parse("the network needs at least two hosts".into()));
    }
    let workload = generate_workload(cfg.arrival_rate, cfg.mean_lifetime, cfg.chains, &host_nodes, cfg.seed);
    let kariz = KarizConfig::with_epsilon(cfg.epsilon);
    let limits = SolveLimits { nodes: Some(cfg.exact_node_limit), ..SolveLimits::default() };

    let initial_nodes: Vec<Vec<Quantity>> = pristine.nodes().iter().map(|n| n.capacity.clone()).collect();
    let initial_links: Vec<u64> = pristine.links().iter().map(|l| l.mbps).collect();
    let mut node_room = initial_nodes.clone();
    let mut link_room = initial_links.clone();
    let mut node_held = vec![vec![Quantity::ZERO; pristine.resource_kinds().len()]; pristine.node_count()];
    let mut link_held = vec![0u64; pristine.link_count()];
    let cpu = pristine.resource_index("cpu").unwrap_or(0);
    let total_cpu: i64 = initial_nodes.iter().map(|c| c.get(cpu).map_or(0, |q| q.milli())).sum();
    let total_bw: u64 = initial_links.iter().sum();

    let mut holds: Vec<Option<Hold>> = vec![None; cfg.chains];
    let mut records = Vec::with_capacity(cfg.chains);
    let mut improve_logs = Vec::new();
    let mut samples = Vec::with_capacity(cfg.chains);
    let mut conserved = true;

    for event in &workload.events {
        let chain = &workload.chains[event.chain];
        match event.kind {
            EventKind::Departure => {
                if let Some(hold) = holds[chain.id].take() {
                    for (m, use_) in &hold.nodes {
                        for (r, &q) in use_.iter().enumerate() {
                            node_room[*m][r] += q;
                            node_held[*m][r] -= q;
                        }
                    }
                    for &(l, v) in &hold.links {
                        link_room[l] += v;
                        link_held[l] -= v;
                    }
                }
            }
            EventKind::Arrival => {
                let residual = pristine.with_capacities(&node_room, &link_room);
                let req = ChainRequest {
                    id: chain.id as u64,
                    lifetime: Some(chain.lifetime),
                    ..ChainRequest::new(&sfs, &pristine.node(chain.source).id, &pristine.node(chain.target).id, cfg.demand)
                };
                let problem = Problem::new(&residual, &req, &cfg.catalog, &cfg.cost)?;
                let outcome: Result<Deployment, String> = match cfg.solver {
                    SolverKind::Kariz => {
                        let run = deploy_problem(&problem, &kariz);
                        improve_logs.extend(run.logs);
                        run.result.map(|a| a.deployment).map_err(|r| r.to_string())
                    }
                    SolverKind::Exact => match solve_problem(&problem, limits) {
                        Ok(r) => r.deployment.ok_or_else(|| format!("{:?}", r.status)),
                        Err(e) => Err(e.to_string()),
                    },
                };
                let mut record = ChainRecord {
                    id: chain.id,
                    arrival_t: chain.arrival,
                    lifetime: chain.lifetime,
                    length: functions.len(),
                    demand: cfg.demand,
                    accepted: false,
                    bw_cost: 0.0,
                    host_cost: 0.0,
                    total_cost: 0.0,
                    reason: None,
                    vnf_utilization: Vec::new(),
                    request: req.clone(),
                    deployment: None,
                };
                match outcome {
                    Ok(dep) => {
                        let report = check_deployment(&residual, &problem.chain, &dep)?;
                        assert!(report.is_feasible(), "solver returned an infeasible deployment:\n{report}");
                        let cost = problem.cost_of(&dep);
                        let hold = hold_of(&problem, &dep);
                        for (m, use_) in &hold.nodes {
                            for (r, &q) in use_.iter().enumerate() {
                                node_room[*m][r] -= q;
                                node_held[*m][r] += q;
                            }
                        }
                        for &(l, v) in &hold.links {
                            link_room[l] -= v;
                            link_held[l] += v;
                        }
                        holds[chain.id] = Some(hold);
                        record.accepted = true;
                        record.bw_cost = cost.bandwidth.as_f64();
                        record.host_cost = cost.host.as_f64();
                        record.total_cost = cost.total.as_f64();
                        record.vnf_utilization = problem
                            .chain
                            .function_stages()
                            .map(|u| {
                                let installed: u64 = dep
                                    .instances
                                    .iter()
                                    .filter(|(k, _)| k.stage == u)
                                    .map(|(k, &n)| problem.chain.stages[u].vnfs[k.vnf].mbps * n as u64)
                                    .sum();
                                dep.stage_allocation(u) as f64 / installed as f64
                            })
                            .collect();
                        record.deployment = Some(dep.describe(&pristine, &problem.chain));
                    }
                    Err(reason) => record.reason = Some(reason),
                }
                records.push(record);
                let used_bw: u64 = link_held.iter().sum();
                let used_cpu: i64 = node_held.iter().map(|h| h.get(cpu).map_or(0, |q| q.milli())).sum();
                samples.push((
                    if total_bw == 0 { 0.0 } else { used_bw as f64 / total_bw as f64 },
                    if total_cpu == 0 { 0.0 } else { used_cpu as f64 / total_cpu as f64 },
                ));
            }
        }
        for m in 0..pristine.node_count() {
            for r in 0..initial_nodes[m].len() {
                conserved &= node_room[m][r] + node_held[m][r] == initial_nodes[m][r];
            }
        }
        for l in 0..pristine.link_count() {
            conserved &= link_room[l] + link_held[l] == initial_links[l];
        }
    }
    conserved &= node_room == initial_nodes && link_room == initial_links;
    let summary = summarize(&records, &samples, &functions);
    Ok(ExperimentMetrics { summary, records, improve_logs, samples, conserved })
}

pub fn write_records_csv<W: io::Write>(records: &[ChainRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `metric,value` rows, one per aggregate.
pub fn write_summary_csv<W: io::Write>(summary: &Summary, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "value"])?;
    for (metric, value) in summary_rows(summary) {
        w.write_record([metric, value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_rows(s: &Summary) -> Vec<(String, f64)> {
    let mut rows = vec![
        ("chains".to_string(), s.chains as f64),
        ("accepted".to_string(), s.accepted as f64),
        ("acceptance_ratio".to_string(), s.acceptance_ratio),
        ("bandwidth_utilization".to_string(), s.bandwidth_utilization),
        ("cpu_utilization".to_string(), s.cpu_utilization),
        ("mean_bw_cost".to_string(), s.mean_bw_cost),
        ("mean_host_cost".to_string(), s.mean_host_cost),
        ("mean_total_cost".to_string(), s.mean_total_cost),
    ];
    rows.extend(s.vnf_utilization.iter().map(|(f, v)| (format!("vnf_utilization_{f}"), *v)));
    rows
}
