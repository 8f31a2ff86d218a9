use std::fmt;

use serde::Serialize;

use super::{
    Arc, Chain, ChainRequest, Deployment, InputError, Quantity, SubstrateNetwork, VnfCatalog,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// Instances on a node fit its resource capacities.
    NodeCapacity,
    /// Endpoint pseudo-VNFs sit exactly on the source and target.
    Location,
    /// Both directions of a link together fit its bandwidth.
    LinkCapacity,
    /// Allocated throughput on a node does not exceed installed throughput.
    Throughput,
    /// Every stage allocates exactly the chain demand.
    Demand,
    /// Net outflow of commodity `c` at a node equals `z(c) - z(c + 1)` there.
    FlowConservation,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 6] = [
        ConstraintFamily::NodeCapacity,
        ConstraintFamily::Location,
        ConstraintFamily::LinkCapacity,
        ConstraintFamily::Throughput,
        ConstraintFamily::Demand,
        ConstraintFamily::FlowConservation,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Node, link, stage or commodity indices identifying the row.
    pub indices: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub family: ConstraintFamily,
    pub violations: Vec<Violation>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintReport {
    pub families: Vec<FamilyReport>,
}

impl ConstraintReport {
    pub fn is_feasible(&self) -> bool {
        self.families.iter().all(FamilyReport::passed)
    }

    pub fn passed(&self, family: ConstraintFamily) -> bool {
        self.families.iter().find(|f| f.family == family).is_some_and(FamilyReport::passed)
    }

    pub fn failed_families(&self) -> Vec<ConstraintFamily> {
        self.families.iter().filter(|f| !f.passed()).map(|f| f.family).collect()
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fam in &self.families {
            let verdict = if fam.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{:?}: {verdict}", fam.family)?;
            for v in &fam.violations {
                writeln!(f, "  {:?} {}", v.indices, v.detail)?;
            }
        }
        Ok(())
    }
}

pub fn feasibility_check(
    net: &SubstrateNetwork,
    req: &ChainRequest,
    cat: &VnfCatalog,
    dep: &Deployment,
) -> Result<ConstraintReport, InputError> {
    let chain = Chain::resolve(net, req, cat)?;
    check_deployment(net, &chain, dep)
}

/// Evaluates the six constraint families against a resolved chain.
pub fn check_deployment(
    net: &SubstrateNetwork,
    chain: &Chain,
    dep: &Deployment,
) -> Result<ConstraintReport, InputError> {
    let n = net.node_count();
    let stages = chain.stages.len();
    let target = chain.target_stage();

    for &(c, arc) in dep.flows.keys() {
        if c >= chain.commodity_count() {
            return Err(InputError::UnknownStage(c));
        }
        if arc.0 >= net.arc_count() {
            return Err(InputError::UnknownLink(arc.link()));
        }
    }
    for k in dep.instances.keys() {
        if k.node >= n {
            return Err(InputError::NodeIndex(k.node));
        }
        let stage = chain.stages.get(k.stage).ok_or(InputError::UnknownStage(k.stage))?;
        if k.vnf >= stage.vnfs.len() {
            return Err(InputError::UnknownVnf { stage: k.stage, vnf: k.vnf });
        }
    }
    for &(node, stage) in dep.allocations.keys() {
        if node >= n {
            return Err(InputError::NodeIndex(node));
        }
        if stage >= stages {
            return Err(InputError::UnknownStage(stage));
        }
    }

    // Full Y and Z with the endpoint pseudo-VNFs filled in.
    let mut y = vec![vec![Vec::new(); stages]; n];
    let mut z = vec![vec![0u64; stages]; n];
    for (m, row) in y.iter_mut().enumerate() {
        for (s, cell) in row.iter_mut().enumerate() {
            *cell = vec![0u64; chain.stages[s].vnfs.len()];
            z[m][s] = dep.allocation(m, s);
        }
    }
    for (k, &count) in &dep.instances {
        y[k.node][k.stage][k.vnf] += count as u64;
    }
    let mut location = Vec::new();
    for (k, _) in dep.instances.iter().filter(|(k, _)| !chain.is_function(k.stage)) {
        location.push(Violation {
            indices: vec![k.node, k.stage],
            detail: "endpoint pseudo-VNF instances are implied and may not be placed".into(),
        });
    }
    for &(m, s) in dep.allocations.keys().filter(|(_, s)| !chain.is_function(*s)) {
        location.push(Violation {
            indices: vec![m, s],
            detail: "endpoint allocations are implied and may not be set".into(),
        });
    }
    y[chain.source][0][0] += 1;
    y[chain.target][target][0] += 1;
    z[chain.source][0] += chain.demand;
    z[chain.target][target] += chain.demand;

    let mut node_capacity = Vec::new();
    for m in 0..n {
        for (r, cap) in net.node(m).capacity.iter().enumerate() {
            let used: Quantity = (0..stages)
                .flat_map(|s| {
                    let yms = &y[m][s];
                    chain.stages[s].vnfs.iter().enumerate().map(move |(u, v)| v.demand[r] * yms[u] as i64)
                })
                .sum();
            if used > *cap {
                node_capacity.push(Violation {
                    indices: vec![m, r],
                    detail: format!("uses {used} of {cap} {}", net.resource_kinds()[r]),
                });
            }
        }
    }

    let mut link_capacity = Vec::new();
    for (l, link) in net.links().iter().enumerate() {
        let used: u64 = (0..chain.commodity_count())
            .map(|c| dep.flow(c, Arc::forward(l)) + dep.flow(c, Arc::backward(l)))
            .sum();
        if used > link.mbps {
            link_capacity.push(Violation {
                indices: vec![l],
                detail: format!("carries {used} of {} Mbps", link.mbps),
            });
        }
    }

    let mut throughput = Vec::new();
    for m in 0..n {
        for s in 0..stages {
            let installed: u64 =
                chain.stages[s].vnfs.iter().zip(&y[m][s]).map(|(v, &cnt)| v.mbps * cnt).sum();
            if z[m][s] > installed {
                throughput.push(Violation {
                    indices: vec![m, s],
                    detail: format!("allocates {} Mbps on {installed} Mbps of instances", z[m][s]),
                });
            }
        }
    }

    let mut demand = Vec::new();
    for s in 0..stages {
        let total: u64 = (0..n).map(|m| z[m][s]).sum();
        if total != chain.demand {
            demand.push(Violation {
                indices: vec![s],
                detail: format!("allocates {total} Mbps, chain demands {}", chain.demand),
            });
        }
    }

    let mut conservation = Vec::new();
    for c in 0..chain.commodity_count() {
        let mut net_out = vec![0i128; n];
        for (&(cc, arc), &v) in dep.flows.range((c, Arc(0))..=(c, Arc(usize::MAX))) {
            debug_assert_eq!(cc, c);
            let (from, to) = net.arc_ends(arc);
            net_out[from] += v as i128;
            net_out[to] -= v as i128;
        }
        for m in 0..n {
            let expected = z[m][c] as i128 - z[m][c + 1] as i128;
            if net_out[m] != expected {
                conservation.push(Violation {
                    indices: vec![m, c],
                    detail: format!("net outflow {} but local balance {expected}", net_out[m]),
                });
            }
        }
    }

    Ok(ConstraintReport {
        families: vec![
            FamilyReport { family: ConstraintFamily::NodeCapacity, violations: node_capacity },
            FamilyReport { family: ConstraintFamily::Location, violations: location },
            FamilyReport { family: ConstraintFamily::LinkCapacity, violations: link_capacity },
            FamilyReport { family: ConstraintFamily::Throughput, violations: throughput },
            FamilyReport { family: ConstraintFamily::Demand, violations: demand },
            FamilyReport { family: ConstraintFamily::FlowConservation, violations: conservation },
        ],
    })
}
