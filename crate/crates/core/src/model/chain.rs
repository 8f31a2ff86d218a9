use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{InputError, NodeId, Quantity, SubstrateNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfType {
    pub name: String,
    /// Maximum traffic one instance processes.
    pub mbps: u64,
    #[serde(default)]
    pub demand: BTreeMap<String, Quantity>,
}

impl VnfType {
    pub fn new(name: &str, mbps: u64, demand: &[(&str, f64)]) -> Self {
        VnfType {
            name: name.to_string(),
            mbps,
            demand: demand.iter().map(|&(k, v)| (k.to_string(), Quantity::from_f64(v))).collect(),
        }
    }
}

/// VNF implementations available for each service function.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VnfCatalog(pub BTreeMap<String, Vec<VnfType>>);

impl VnfCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, sf: &str, types: Vec<VnfType>) -> Self {
        self.0.insert(sf.to_string(), types);
        self
    }

    pub fn get(&self, sf: &str) -> Option<&[VnfType]> {
        self.0.get(sf).map(Vec::as_slice)
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A chain request as it arrives: ordered SF names between two endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRequest {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub id: u64,
    pub sfs: Vec<String>,
    pub source: String,
    pub target: String,
    pub mbps: u64,
    /// Seconds the chain stays deployed; only the simulator uses it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<f64>,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ChainRequest {
    pub fn new(sfs: &[&str], source: &str, target: &str, mbps: u64) -> Self {
        ChainRequest {
            id: 0,
            sfs: sfs.iter().map(|s| s.to_string()).collect(),
            source: source.to_string(),
            target: target.to_string(),
            mbps,
            lifetime: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageRole {
    Source,
    Function,
    Target,
}

/// A VNF type with its demand vector aligned to the network's resource kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnfKind {
    pub name: String,
    pub mbps: u64,
    pub demand: Vec<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub role: StageRole,
    pub vnfs: Vec<VnfKind>,
}

/// A request resolved against a network and catalog.
///
/// Stage `0` is the source endpoint, stages `1..=k` are the service
/// functions and stage `k + 1` is the target. The endpoints carry a single
/// synthesized VNF with throughput `demand` and no resource demand, pinned
/// to `source`/`target`. Commodity `c` is the traffic emitted by stage `c`
/// and consumed by stage `c + 1`, so commodities are `0..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub source: NodeId,
    pub target: NodeId,
    pub demand: u64,
    pub stages: Vec<Stage>,
}

impl Chain {
    pub fn resolve(
        net: &SubstrateNetwork,
        req: &ChainRequest,
        cat: &VnfCatalog,
    ) -> Result<Chain, InputError> {
        if req.sfs.is_empty() {
            return Err(InputError::EmptyChain);
        }
        if req.mbps == 0 {
            return Err(InputError::InvalidDemand(req.mbps));
        }
        let source =
            net.node_id(&req.source).ok_or_else(|| InputError::UnknownNode(req.source.clone()))?;
        let target =
            net.node_id(&req.target).ok_or_else(|| InputError::UnknownNode(req.target.clone()))?;
        for (sf, types) in &cat.0 {
            for t in types {
                if t.mbps == 0 {
                    return Err(InputError::ZeroThroughput { sf: sf.clone(), vnf: t.name.clone() });
                }
            }
        }

        let kinds = net.resource_kinds();
        let pseudo = |name: &str, role| Stage {
            name: name.to_string(),
            role,
            vnfs: vec![VnfKind {
                name: name.to_string(),
                mbps: req.mbps,
                demand: vec![Quantity::ZERO; kinds.len()],
            }],
        };
        let mut stages = vec![pseudo("source", StageRole::Source)];
        for sf in &req.sfs {
            let types = cat
                .get(sf)
                .filter(|t| !t.is_empty())
                .ok_or_else(|| InputError::MissingCatalogEntry(sf.clone()))?;
            let mut vnfs = Vec::with_capacity(types.len());
            for t in types {
                let mut demand = vec![Quantity::ZERO; kinds.len()];
                for (kind, &q) in &t.demand {
                    let r = net
                        .resource_index(kind)
                        .ok_or_else(|| InputError::UnknownResource(kind.clone()))?;
                    if q.is_negative() {
                        return Err(InputError::NegativeDemand {
                            sf: sf.clone(),
                            vnf: t.name.clone(),
                            resource: kind.clone(),
                        });
                    }
                    demand[r] = q;
                }
                if demand.iter().all(|&q| q == Quantity::ZERO) {
                    return Err(InputError::FreeVnf { sf: sf.clone(), vnf: t.name.clone() });
                }
                vnfs.push(VnfKind { name: t.name.clone(), mbps: t.mbps, demand });
            }
            stages.push(Stage { name: sf.clone(), role: StageRole::Function, vnfs });
        }
        stages.push(pseudo("target", StageRole::Target));
        Ok(Chain { source, target, demand: req.mbps, stages })
    }

    /// Number of service functions `k`.
    pub fn len(&self) -> usize {
        self.stages.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn target_stage(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn commodity_count(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn function_stages(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.len()
    }

    pub fn is_function(&self, stage: usize) -> bool {
        stage >= 1 && stage <= self.len()
    }
}

/// Checks every input invariant without building anything.
pub fn validate_inputs(
    net: &SubstrateNetwork,
    req: &ChainRequest,
    cat: &VnfCatalog,
) -> Result<(), InputError> {
    Chain::resolve(net, req, cat).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Link, Node};

    fn tiny() -> SubstrateNetwork {
        let cap = vec![Quantity::from_units(8)];
        SubstrateNetwork::new(
            vec!["cpu".into()],
            vec![Node { id: "a".into(), capacity: cap.clone() }, Node { id: "b".into(), capacity: cap }],
            vec![Link { a: 0, b: 1, mbps: 100 }],
        )
        .unwrap()
    }

    fn catalog() -> VnfCatalog {
        VnfCatalog::new().with("fw", vec![VnfType::new("fw1", 100, &[("cpu", 1.0)])])
    }

    #[test]
    fn missing_catalog_entry() {
        let req = ChainRequest::new(&["fw", "NAT"], "a", "b", 10);
        assert_eq!(
            validate_inputs(&tiny(), &req, &catalog()),
            Err(InputError::MissingCatalogEntry("NAT".into()))
        );
    }

    #[test]
    fn zero_demand_is_rejected() {
        let req = ChainRequest::new(&["fw"], "a", "b", 0);
        assert_eq!(validate_inputs(&tiny(), &req, &catalog()), Err(InputError::InvalidDemand(0)));
    }

    #[test]
    fn source_equal_to_target_is_allowed() {
        let req = ChainRequest::new(&["fw"], "a", "a", 10);
        assert!(validate_inputs(&tiny(), &req, &catalog()).is_ok());
    }

    #[test]
    fn dangling_endpoint_and_unknown_resource() {
        let req = ChainRequest::new(&["fw"], "a", "zz", 10);
        assert_eq!(validate_inputs(&tiny(), &req, &catalog()), Err(InputError::UnknownNode("zz".into())));
        let cat = VnfCatalog::new().with("fw", vec![VnfType::new("fw1", 100, &[("gpu", 1.0)])]);
        let req = ChainRequest::new(&["fw"], "a", "b", 10);
        assert_eq!(validate_inputs(&tiny(), &req, &cat), Err(InputError::UnknownResource("gpu".into())));
    }

    #[test]
    fn resolved_chain_synthesizes_endpoint_stages() {
        let req = ChainRequest::new(&["fw"], "a", "b", 70);
        let chain = Chain::resolve(&tiny(), &req, &catalog()).unwrap();
        assert_eq!(chain.stages.len(), 3);
        assert_eq!(chain.stages[0].vnfs[0].mbps, 70);
        assert_eq!(chain.stages[2].role, StageRole::Target);
        assert_eq!(chain.commodity_count(), 2);
    }

    #[test]
    fn request_file_schema() {
        let req = ChainRequest::from_json(r#"{"sfs": ["fw"], "source": "a", "target": "b", "mbps": 5}"#)
            .unwrap();
        assert_eq!(req, ChainRequest::new(&["fw"], "a", "b", 5));
    }
}
