use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sfc_core::model::{Cost, Quantity};
use sfc_core::packing::Candidate;

/// A node residual and a catalog whose full count grid has at most
/// `10_000` cells.
pub fn random_node(rng: &mut ChaCha8Rng) -> (Vec<Quantity>, Vec<Candidate>) {
    loop {
        let kinds = rng.random_range(1..=3);
        let residual: Vec<Quantity> =
            (0..kinds).map(|_| Quantity::from_milli(rng.random_range(0..=16) * 500)).collect();
        let types = rng.random_range(0..=4);
        let cands: Vec<Candidate> = (0..types)
            .map(|_| {
                let mut demand: Vec<Quantity> = (0..kinds)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            Quantity::ZERO
                        } else {
                            Quantity::from_milli(rng.random_range(1..=8) * 250)
                        }
                    })
                    .collect();
                if demand.iter().all(|q| *q == Quantity::ZERO) {
                    demand[0] = Quantity::from_milli(1000);
                }
                Candidate {
                    mbps: rng.random_range(1..=40) * 10,
                    demand,
                    cost: Cost::from_cents(rng.random_range(0..=500)),
                }
            })
            .collect();
        if grid(&residual, &cands).iter().map(|&n| n + 1).product::<u64>() <= 10_000 {
            return (residual, cands);
        }
    }
}

/// Largest count of each candidate that fits alone.
pub fn grid(residual: &[Quantity], cands: &[Candidate]) -> Vec<u64> {
    cands
        .iter()
        .map(|c| {
            c.demand
                .iter()
                .zip(residual)
                .filter(|(d, _)| d.milli() > 0)
                .map(|(d, r)| (r.milli() / d.milli()) as u64)
                .min()
                .expect("every candidate uses some resource")
        })
        .collect()
}

/// Every count vector that fits, with its throughput and cost.
pub fn feasible_packings(residual: &[Quantity], cands: &[Candidate]) -> Vec<(Vec<u32>, u64, i64)> {
    let bounds = grid(residual, cands);
    let mut out = Vec::new();
    let mut counts = vec![0u64; cands.len()];
    loop {
        let fits = (0..residual.len()).all(|r| {
            let used: i64 = counts.iter().zip(cands).map(|(&n, c)| n as i64 * c.demand[r].milli()).sum();
            used <= residual[r].milli()
        });
        if fits {
            let mbps = counts.iter().zip(cands).map(|(&n, c)| n * c.mbps).sum();
            let cost = counts.iter().zip(cands).map(|(&n, c)| n as i64 * c.cost.cents()).sum();
            out.push((counts.iter().map(|&n| n as u32).collect(), mbps, cost));
        }
        let mut k = 0;
        while k < counts.len() {
            counts[k] += 1;
            if counts[k] <= bounds[k] {
                break;
            }
            counts[k] = 0;
            k += 1;
        }
        if k == counts.len() {
            return out;
        }
    }
}

/// Enumeration answer for `max_throughput`: (counts, mbps, cost).
pub fn oracle_max(residual: &[Quantity], cands: &[Candidate]) -> (Vec<u32>, u64, i64) {
    feasible_packings(residual, cands)
        .into_iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)))
        .expect("the empty packing always fits")
}

/// Enumeration answer for `min_cost_instances` under host cost.
pub fn oracle_min(residual: &[Quantity], demand: u64, cands: &[Candidate]) -> Option<(Vec<u32>, u64, i64)> {
    feasible_packings(residual, cands)
        .into_iter()
        .filter(|p| p.1 >= demand)
        .min_by(|a, b| a.2.cmp(&b.2).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)))
}
