//! Small reference instances shared by tests, benchmarks and the CLI docs.

use super::{
    Arc, ChainRequest, Deployment, Link, Node, Quantity, SubstrateNetwork, VnfCatalog, VnfType,
};

/// Six hosts `A..F` (8 cores, 64 GB each) joined by 130 Mbps links, an
/// `IDS -> FW` chain from `A` to `F` at 210 Mbps, and the two-type catalogs
/// for both functions.
pub fn worked_example() -> (SubstrateNetwork, VnfCatalog, ChainRequest) {
    let cap = vec![Quantity::from_units(8), Quantity::from_units(64)];
    let nodes = ["A", "B", "C", "D", "E", "F"]
        .iter()
        .map(|id| Node { id: id.to_string(), capacity: cap.clone() })
        .collect();
    let edges = [(0, 1), (0, 3), (1, 2), (3, 2), (1, 5), (2, 5), (3, 4), (4, 5)];
    let links = edges.iter().map(|&(a, b)| Link { a, b, mbps: 130 }).collect();
    let net = SubstrateNetwork::new(vec!["cpu".into(), "memory".into()], nodes, links)
        .expect("fixture network is valid");
    let cat = VnfCatalog::new()
        .with(
            "IDS",
            vec![
                VnfType::new("IDS1", 50, &[("cpu", 1.0), ("memory", 24.0)]),
                VnfType::new("IDS2", 80, &[("cpu", 1.0), ("memory", 32.0)]),
            ],
        )
        .with(
            "FW",
            vec![
                VnfType::new("FW1", 100, &[("cpu", 1.0), ("memory", 1.75)]),
                VnfType::new("FW2", 200, &[("cpu", 2.0), ("memory", 3.5)]),
            ],
        );
    let req = ChainRequest::new(&["IDS", "FW"], "A", "F", 210);
    (net, cat, req)
}

/// The hand-built deployment of [`worked_example`]: IDS split 80/130 over
/// `B` and `D`, FW on `B` (80) and `C` (130).
pub fn worked_example_deployment(net: &SubstrateNetwork) -> Deployment {
    let id = |name: &str| net.node_id(name).expect("fixture node");
    let arc = |a: &str, b: &str| {
        let (a, b) = (id(a), id(b));
        let l = net.find_link(a, b).expect("fixture link");
        if net.link(l).a == a { Arc::forward(l) } else { Arc::backward(l) }
    };
    let (ids, fw) = (1, 2);
    let mut dep = Deployment::new();
    dep.add_instances(id("B"), ids, 1, 1);
    dep.add_instances(id("B"), fw, 0, 1);
    dep.add_instances(id("D"), ids, 0, 1);
    dep.add_instances(id("D"), ids, 1, 1);
    dep.add_instances(id("C"), fw, 1, 1);
    dep.add_allocation(id("B"), ids, 80);
    dep.add_allocation(id("D"), ids, 130);
    dep.add_allocation(id("B"), fw, 80);
    dep.add_allocation(id("C"), fw, 130);
    dep.add_flow(0, arc("A", "B"), 80);
    dep.add_flow(0, arc("A", "D"), 130);
    dep.add_flow(1, arc("D", "C"), 130);
    dep.add_flow(2, arc("B", "F"), 80);
    dep.add_flow(2, arc("C", "F"), 130);
    dep
}
