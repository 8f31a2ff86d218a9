use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{InputError, Quantity};

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    /// Capacity per resource kind, aligned with [`SubstrateNetwork::resource_kinds`].
    pub capacity: Vec<Quantity>,
}

/// Undirected link. Bandwidth is shared by both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub mbps: u64,
}

/// One direction of an undirected link: `2 * link` is `a -> b`, `2 * link + 1`
/// is `b -> a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc(pub usize);

impl Arc {
    pub fn forward(link: LinkId) -> Arc {
        Arc(2 * link)
    }

    pub fn backward(link: LinkId) -> Arc {
        Arc(2 * link + 1)
    }

    pub fn link(self) -> LinkId {
        self.0 / 2
    }

    pub fn reverse(self) -> Arc {
        Arc(self.0 ^ 1)
    }
}

/// The substrate graph: nodes with per-resource capacities and undirected
/// capacitated links, at most one per node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateNetwork {
    resource_kinds: Vec<String>,
    nodes: Vec<Node>,
    links: Vec<Link>,
    index: HashMap<String, NodeId>,
    incident: Vec<Vec<LinkId>>,
}

impl SubstrateNetwork {
    pub fn new(
        resource_kinds: Vec<String>,
        nodes: Vec<Node>,
        links: Vec<Link>,
    ) -> Result<Self, InputError> {
        let mut seen = HashSet::new();
        for kind in &resource_kinds {
            if !seen.insert(kind.as_str()) {
                return Err(InputError::DuplicateResource(kind.clone()));
            }
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(InputError::DuplicateNode(node.id.clone()));
            }
            if node.capacity.len() != resource_kinds.len() {
                return Err(InputError::Parse(format!(
                    "node `{}` has {} capacities for {} resource kinds",
                    node.id,
                    node.capacity.len(),
                    resource_kinds.len()
                )));
            }
            if let Some(r) = node.capacity.iter().position(|c| c.is_negative()) {
                return Err(InputError::NegativeCapacity {
                    node: node.id.clone(),
                    resource: resource_kinds[r].clone(),
                });
            }
        }
        let mut incident = vec![Vec::new(); nodes.len()];
        let mut pairs = HashSet::new();
        for (l, link) in links.iter().enumerate() {
            for end in [link.a, link.b] {
                if end >= nodes.len() {
                    return Err(InputError::NodeIndex(end));
                }
            }
            if link.a == link.b {
                return Err(InputError::SelfLoop(nodes[link.a].id.clone()));
            }
            let key = (link.a.min(link.b), link.a.max(link.b));
            if !pairs.insert(key) {
                return Err(InputError::ParallelLink(
                    nodes[key.0].id.clone(),
                    nodes[key.1].id.clone(),
                ));
            }
            incident[link.a].push(l);
            incident[link.b].push(l);
        }
        Ok(SubstrateNetwork { resource_kinds, nodes, links, index, incident })
    }

    pub fn resource_kinds(&self) -> &[String] {
        &self.resource_kinds
    }

    pub fn resource_index(&self, kind: &str) -> Option<usize> {
        self.resource_kinds.iter().position(|k| k == kind)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn arc_count(&self) -> usize {
        2 * self.links.len()
    }

    /// Links incident on `node` (the set `E_m`).
    pub fn incident(&self, node: NodeId) -> &[LinkId] {
        &self.incident[node]
    }

    pub fn arc_ends(&self, arc: Arc) -> (NodeId, NodeId) {
        let link = &self.links[arc.link()];
        if arc.0 % 2 == 0 {
            (link.a, link.b)
        } else {
            (link.b, link.a)
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> {
        (0..self.arc_count()).map(Arc)
    }

    pub fn find_link(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.incident[a]
            .iter()
            .copied()
            .find(|&l| {
                let link = &self.links[l];
                (link.a == a && link.b == b) || (link.a == b && link.b == a)
            })
    }

    /// Same topology with different capacities; used for residual snapshots.
    pub fn with_capacities(
        &self,
        node_capacity: &[Vec<Quantity>],
        link_mbps: &[u64],
    ) -> SubstrateNetwork {
        assert_eq!(node_capacity.len(), self.nodes.len());
        assert_eq!(link_mbps.len(), self.links.len());
        let mut out = self.clone();
        for (node, cap) in out.nodes.iter_mut().zip(node_capacity) {
            node.capacity.clone_from(cap);
        }
        for (link, &mbps) in out.links.iter_mut().zip(link_mbps) {
            link.mbps = mbps;
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let file: NetworkFile = serde_json::from_str(text)?;
        file.into_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkFile::from_network(self)).expect("serializable")
    }
}

/// On-disk form: `{resource_kinds, nodes: [{id, capacity{..}}], links: [{a, b, mbps}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub resource_kinds: Vec<String>,
    pub nodes: Vec<NodeFile>,
    pub links: Vec<LinkFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub id: String,
    #[serde(default)]
    pub capacity: BTreeMap<String, Quantity>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub a: String,
    pub b: String,
    pub mbps: u64,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<SubstrateNetwork, InputError> {
        let kinds = self.resource_kinds;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in self.nodes {
            let mut capacity = vec![Quantity::ZERO; kinds.len()];
            for (kind, q) in n.capacity {
                let r = kinds
                    .iter()
                    .position(|k| *k == kind)
                    .ok_or(InputError::UnknownResource(kind))?;
                capacity[r] = q;
            }
            nodes.push(Node { id: n.id, capacity });
        }
        let lookup: HashMap<&str, NodeId> =
            nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut links = Vec::with_capacity(self.links.len());
        for l in &self.links {
            let a = *lookup.get(l.a.as_str()).ok_or_else(|| InputError::UnknownNode(l.a.clone()))?;
            let b = *lookup.get(l.b.as_str()).ok_or_else(|| InputError::UnknownNode(l.b.clone()))?;
            links.push(Link { a, b, mbps: l.mbps });
        }
        SubstrateNetwork::new(kinds, nodes, links)
    }

    pub fn from_network(net: &SubstrateNetwork) -> Self {
        NetworkFile {
            resource_kinds: net.resource_kinds.clone(),
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.clone(),
                    capacity: net
                        .resource_kinds
                        .iter()
                        .cloned()
                        .zip(n.capacity.iter().copied())
                        .collect(),
                })
                .collect(),
            links: net
                .links
                .iter()
                .map(|l| LinkFile {
                    a: net.nodes[l.a].id.clone(),
                    b: net.nodes[l.b].id.clone(),
                    mbps: l.mbps,
                })
                .collect(),
        }
    }
}
