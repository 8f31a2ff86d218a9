use crate::model::{InputError, Link, Node, Quantity, SubstrateNetwork};

/// Resources given to every host; switches get zero of each kind.
#[derive(Debug, Clone, PartialEq)]
pub struct HostProfile {
    pub kinds: Vec<String>,
    pub capacity: Vec<Quantity>,
}

impl Default for HostProfile {
    /// Eight cores and nothing else.
    fn default() -> Self {
        HostProfile { kinds: vec!["cpu".into()], capacity: vec![Quantity::from_units(8)] }
    }
}

/// A `k`-ary fat-tree: `(k/2)²` core switches, `k` pods of `k/2`
/// aggregation and `k/2` edge switches, and `k/2` hosts per edge switch.
///
/// Nodes are named `core-i`, `agg-p-i`, `edge-p-i` and `host-p-e-i`.
pub fn generate_fat_tree(k: usize, hosts: &HostProfile, link_mbps: u64) -> Result<SubstrateNetwork, InputError> {
    if k < 2 || k % 2 != 0 {
        return Err(InputError::Parse(format!("fat-tree arity must be even and at least 2, got {k}")));
    }
    let half = k / 2;
    let zero = vec![Quantity::ZERO; hosts.kinds.len()];
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut add = |id: String, capacity: &Vec<Quantity>| {
        nodes.push(Node { id, capacity: capacity.clone() });
        nodes.len() - 1
    };
    let core: Vec<usize> = (0..half * half).map(|i| add(format!("core-{i}"), &zero)).collect();
    for p in 0..k {
        let agg: Vec<usize> = (0..half).map(|i| add(format!("agg-{p}-{i}"), &zero)).collect();
        let edge: Vec<usize> = (0..half).map(|i| add(format!("edge-{p}-{i}"), &zero)).collect();
        for (i, &a) in agg.iter().enumerate() {
            for &c in &core[i * half..(i + 1) * half] {
                links.push(Link { a: c, b: a, mbps: link_mbps });
            }
            for &e in &edge {
                links.push(Link { a, b: e, mbps: link_mbps });
            }
        }
        for (e, &sw) in edge.iter().enumerate() {
            for h in 0..half {
                let host = add(format!("host-{p}-{e}-{h}"), &hosts.capacity);
                links.push(Link { a: sw, b: host, mbps: link_mbps });
            }
        }
    }
    SubstrateNetwork::new(hosts.kinds.clone(), nodes, links)
}

/// Nodes with any positive capacity.
pub fn hosts(net: &SubstrateNetwork) -> Vec<usize> {
    (0..net.node_count())
        .filter(|&m| net.node(m).capacity.iter().any(|q| q.milli() > 0))
        .collect()
}
