use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Chain, ChainRequest, Cost, Deployment, InputError, SubstrateNetwork, VnfCatalog, VnfKind};

/// Cost weights: `alpha[r]` per unit of resource `r` held by an instance,
/// `beta` per Mbps carried over one directed link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    #[serde(default)]
    pub alpha: BTreeMap<String, f64>,
    pub beta: f64,
}

impl Default for CostModel {
    /// One core costs 1, one Mbps over one link costs 0.01.
    fn default() -> Self {
        CostModel { alpha: BTreeMap::from([("cpu".to_string(), 1.0)]), beta: 0.01 }
    }
}

impl CostModel {
    pub fn new(alpha: &[(&str, f64)], beta: f64) -> Self {
        CostModel { alpha: alpha.iter().map(|&(k, v)| (k.to_string(), v)).collect(), beta }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(InputError::NegativeWeight("beta".into()));
        }
        for (k, &v) in &self.alpha {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(InputError::NegativeWeight(k.clone()));
            }
        }
        Ok(())
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CostModel {
            alpha: self.alpha.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
            beta: self.beta * factor,
        }
    }

    pub fn bandwidth_unit(&self) -> Cost {
        Cost::from_f64(self.beta)
    }

    /// Host cost of one instance, rounded once to 0.01.
    pub fn instance_cost(&self, kinds: &[String], vnf: &VnfKind) -> Cost {
        let raw: f64 = kinds
            .iter()
            .zip(&vnf.demand)
            .map(|(k, q)| self.alpha.get(k).copied().unwrap_or(0.0) * q.as_f64())
            .sum();
        Cost::from_f64(raw)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub bandwidth: Cost,
    pub host: Cost,
    pub total: Cost,
}

/// A validated request bundled with its network and priced VNF types.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub net: &'a SubstrateNetwork,
    pub chain: Chain,
    /// Host cost of one instance, per stage and VNF type.
    pub unit_cost: Vec<Vec<Cost>>,
    /// Cost of one Mbps on one directed link.
    pub beta: Cost,
}

impl<'a> Problem<'a> {
    pub fn new(
        net: &'a SubstrateNetwork,
        req: &ChainRequest,
        cat: &VnfCatalog,
        cost: &CostModel,
    ) -> Result<Self, InputError> {
        cost.validate()?;
        let chain = Chain::resolve(net, req, cat)?;
        Ok(Self::from_chain(net, chain, cost))
    }

    pub fn from_chain(net: &'a SubstrateNetwork, chain: Chain, cost: &CostModel) -> Self {
        let kinds = net.resource_kinds();
        let unit_cost = chain
            .stages
            .iter()
            .map(|s| s.vnfs.iter().map(|v| cost.instance_cost(kinds, v)).collect())
            .collect();
        Problem { net, chain, unit_cost, beta: cost.bandwidth_unit() }
    }

    pub fn cost_of(&self, dep: &Deployment) -> CostBreakdown {
        total_cost(self, dep)
    }
}

/// Bandwidth cost counts every directed Mbps-hop once; host cost sums the
/// weighted demands of every instance on every node.
pub fn total_cost(problem: &Problem<'_>, dep: &Deployment) -> CostBreakdown {
    let hops: u64 = dep.flows.values().sum();
    let bandwidth = problem.beta * hops as i64;
    let host = dep
        .instances
        .iter()
        .map(|(k, &count)| problem.unit_cost[k.stage][k.vnf] * count as i64)
        .sum();
    CostBreakdown { bandwidth, host, total: bandwidth + host }
}
