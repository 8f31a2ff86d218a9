use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::model::NodeId;

/// One chain request of a workload.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainArrival {
    pub id: usize,
    pub arrival: f64,
    pub lifetime: f64,
    pub source: NodeId,
    pub target: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    /// Listed first so that resources freed at an instant are available to
    /// a chain arriving at the same instant.
    Departure,
    Arrival,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub chain: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub chains: Vec<ChainArrival>,
    /// Arrivals and departures by time.
    pub events: Vec<Event>,
}

/// Poisson arrivals at `rate` chains per second with exponential lifetimes
/// of mean `mean_lifetime`, endpoints drawn uniformly from `hosts` with
/// source and target distinct.
pub fn generate_workload(rate: f64, mean_lifetime: f64, count: usize, hosts: &[NodeId], seed: u64) -> Workload {
    assert!(rate > 0.0 && mean_lifetime > 0.0, "rate and lifetime must be positive");
    assert!(hosts.len() >= 2, "need two hosts for distinct endpoints");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(rate).expect("positive rate");
    let life = Exp::new(1.0 / mean_lifetime).expect("positive lifetime");
    let mut now = 0.0;
    let mut chains = Vec::with_capacity(count);
    for id in 0..count {
        now += gap.sample(&mut rng);
        let lifetime = life.sample(&mut rng);
        let s = rng.random_range(0..hosts.len());
        let t = (s + rng.random_range(1..hosts.len())) % hosts.len();
        chains.push(ChainArrival { id, arrival: now, lifetime, source: hosts[s], target: hosts[t] });
    }
    let mut events: Vec<Event> = chains
        .iter()
        .flat_map(|c| {
            [
                Event { time: c.arrival, kind: EventKind::Arrival, chain: c.id },
                Event { time: c.arrival + c.lifetime, kind: EventKind::Departure, chain: c.id },
            ]
        })
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.kind.cmp(&b.kind)).then(a.chain.cmp(&b.chain)));
    Workload { chains, events }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_events() {
        let hosts = [3, 5, 8];
        assert_eq!(generate_workload(0.01, 10_800.0, 50, &hosts, 9), generate_workload(0.01, 10_800.0, 50, &hosts, 9));
        assert_ne!(generate_workload(0.01, 10_800.0, 50, &hosts, 9), generate_workload(0.01, 10_800.0, 50, &hosts, 10));
    }

    #[test]
    fn endpoints_are_distinct_hosts() {
        let hosts = [3, 5];
        let w = generate_workload(0.01, 100.0, 200, &hosts, 1);
        for c in &w.chains {
            assert_ne!(c.source, c.target);
            assert!(hosts.contains(&c.source) && hosts.contains(&c.target));
        }
    }

    #[test]
    fn every_chain_arrives_before_it_departs() {
        let w = generate_workload(0.5, 3.0, 100, &[0, 1, 2], 4);
        assert_eq!(w.events.len(), 200);
        assert!(w.events.windows(2).all(|p| p[0].time <= p[1].time));
        let mut arrived = vec![false; 100];
        for e in &w.events {
            match e.kind {
                EventKind::Arrival => arrived[e.chain] = true,
                EventKind::Departure => assert!(arrived[e.chain]),
            }
        }
    }
}
