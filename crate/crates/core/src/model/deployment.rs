use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Arc, Chain, InputError, NodeId, SubstrateNetwork};

/// Key of an instance count `y`: node, chain stage and index of the VNF
/// type within that stage's catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceKey {
    pub node: NodeId,
    pub stage: usize,
    pub vnf: usize,
}

/// A solution `(X, Y, Z)`.
///
/// * `flows[(c, arc)]` is the traffic of commodity `c` on a directed arc.
/// * `instances[key]` is the number of instances of one VNF type on a node.
/// * `allocations[(node, stage)]` is the throughput allocated to a stage on
///   a node.
///
/// Only service-function stages appear in `instances` and `allocations`;
/// the endpoint pseudo-VNFs are implied. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deployment {
    pub flows: BTreeMap<(usize, Arc), u64>,
    pub instances: BTreeMap<InstanceKey, u32>,
    pub allocations: BTreeMap<(NodeId, usize), u64>,
}

impl Deployment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty() && self.instances.is_empty() && self.allocations.is_empty()
    }

    pub fn add_flow(&mut self, commodity: usize, arc: Arc, mbps: u64) {
        if mbps > 0 {
            *self.flows.entry((commodity, arc)).or_default() += mbps;
        }
    }

    pub fn add_instances(&mut self, node: NodeId, stage: usize, vnf: usize, count: u32) {
        if count > 0 {
            *self.instances.entry(InstanceKey { node, stage, vnf }).or_default() += count;
        }
    }

    pub fn add_allocation(&mut self, node: NodeId, stage: usize, mbps: u64) {
        if mbps > 0 {
            *self.allocations.entry((node, stage)).or_default() += mbps;
        }
    }

    pub fn flow(&self, commodity: usize, arc: Arc) -> u64 {
        self.flows.get(&(commodity, arc)).copied().unwrap_or(0)
    }

    pub fn allocation(&self, node: NodeId, stage: usize) -> u64 {
        self.allocations.get(&(node, stage)).copied().unwrap_or(0)
    }

    /// Sum of `z` over all nodes for one stage.
    pub fn stage_allocation(&self, stage: usize) -> u64 {
        self.allocations.iter().filter(|((_, s), _)| *s == stage).map(|(_, &v)| v).sum()
    }

    /// Entry-wise sum of two deployments.
    pub fn merged(&self, other: &Deployment) -> Deployment {
        let mut out = self.clone();
        for (&(c, a), &v) in &other.flows {
            out.add_flow(c, a, v);
        }
        for (&k, &v) in &other.instances {
            out.add_instances(k.node, k.stage, k.vnf, v);
        }
        for (&(n, s), &v) in &other.allocations {
            out.add_allocation(n, s, v);
        }
        out
    }

    /// Named, serializable form for reports.
    pub fn describe(&self, net: &SubstrateNetwork, chain: &Chain) -> DeploymentView {
        let stage_name = |s: usize| chain.stages.get(s).map_or_else(|| format!("#{s}"), |st| st.name.clone());
        DeploymentView {
            flows: self
                .flows
                .iter()
                .map(|(&(c, arc), &mbps)| {
                    let (from, to) = net.arc_ends(arc);
                    FlowEntry {
                        stage: c,
                        commodity: stage_name(c),
                        from: net.node(from).id.clone(),
                        to: net.node(to).id.clone(),
                        mbps,
                    }
                })
                .collect(),
            instances: self
                .instances
                .iter()
                .map(|(k, &count)| InstanceEntry {
                    stage: k.stage,
                    node: net.node(k.node).id.clone(),
                    sf: stage_name(k.stage),
                    vnf: chain
                        .stages
                        .get(k.stage)
                        .and_then(|s| s.vnfs.get(k.vnf))
                        .map_or_else(|| format!("#{}", k.vnf), |v| v.name.clone()),
                    count,
                })
                .collect(),
            allocations: self
                .allocations
                .iter()
                .map(|(&(n, s), &mbps)| AllocationEntry {
                    stage: s,
                    node: net.node(n).id.clone(),
                    sf: stage_name(s),
                    mbps,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEntry {
    /// Commodity index; `commodity` names the stage that emits it.
    pub stage: usize,
    pub commodity: String,
    pub from: String,
    pub to: String,
    pub mbps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub stage: usize,
    pub node: String,
    pub sf: String,
    pub vnf: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationEntry {
    pub stage: usize,
    pub node: String,
    pub sf: String,
    pub mbps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentView {
    pub flows: Vec<FlowEntry>,
    pub instances: Vec<InstanceEntry>,
    pub allocations: Vec<AllocationEntry>,
}

impl DeploymentView {
    /// Inverse of [`Deployment::describe`]. Stage indices are authoritative;
    /// node and VNF names are looked up.
    pub fn to_deployment(&self, net: &SubstrateNetwork, chain: &Chain) -> Result<Deployment, InputError> {
        let node = |name: &str| net.node_id(name).ok_or_else(|| InputError::UnknownNode(name.to_string()));
        let mut dep = Deployment::new();
        for f in &self.flows {
            let (a, b) = (node(&f.from)?, node(&f.to)?);
            let link = net
                .find_link(a, b)
                .ok_or_else(|| InputError::Parse(format!("no link between `{}` and `{}`", f.from, f.to)))?;
            let arc = if net.link(link).a == a { Arc::forward(link) } else { Arc::backward(link) };
            dep.add_flow(f.stage, arc, f.mbps);
        }
        for i in &self.instances {
            let stage = chain.stages.get(i.stage).ok_or(InputError::UnknownStage(i.stage))?;
            let vnf = stage
                .vnfs
                .iter()
                .position(|v| v.name == i.vnf)
                .ok_or_else(|| InputError::Parse(format!("stage {} has no VNF `{}`", i.stage, i.vnf)))?;
            dep.add_instances(node(&i.node)?, i.stage, vnf, i.count);
        }
        for a in &self.allocations {
            dep.add_allocation(node(&a.node)?, a.stage, a.mbps);
        }
        Ok(dep)
    }
}
