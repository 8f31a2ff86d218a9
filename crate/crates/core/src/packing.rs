//! Per-node multidimensional knapsacks: the most throughput that fits in a
//! node's residual resources, and the cheapest instance mix that covers a
//! throughput demand.

use std::cmp::Ordering;

use serde::Serialize;

use crate::model::{Cost, Quantity, Stage};

/// One VNF type as a knapsack item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub mbps: u64,
    pub demand: Vec<Quantity>,
    /// Host cost of one instance.
    pub cost: Cost,
}

impl Candidate {
    /// Items for every VNF type of `stage`, priced by `unit_cost`.
    pub fn for_stage(stage: &Stage, unit_cost: &[Cost]) -> Vec<Candidate> {
        stage
            .vnfs
            .iter()
            .zip(unit_cost)
            .map(|(v, &cost)| Candidate { mbps: v.mbps, demand: v.demand.clone(), cost })
            .collect()
    }

    /// Most copies that fit in `residual` on their own.
    fn fit(&self, residual: &[Quantity]) -> u64 {
        self.demand
            .iter()
            .zip(residual)
            .filter(|(d, _)| d.milli() > 0)
            .map(|(d, r)| (r.milli().max(0) / d.milli()) as u64)
            .min()
            .unwrap_or(u64::MAX)
    }
}

/// What the cheapest packing minimizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum PackingObjective {
    /// Weighted host cost of the instances.
    #[default]
    HostCost,
    /// Amount of one resource kind, typically CPU cores.
    Resource(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingResult {
    /// Instance count per candidate, in candidate order.
    pub counts: Vec<u32>,
    pub mbps: u64,
    pub consumed: Vec<Quantity>,
    pub cost: Cost,
}

impl PackingResult {
    fn from_counts(counts: &[u64], cands: &[Candidate], kinds: usize) -> Self {
        let mut consumed = vec![Quantity::ZERO; kinds];
        let mut mbps = 0;
        let mut cost = Cost::ZERO;
        for (&n, c) in counts.iter().zip(cands) {
            mbps += n * c.mbps;
            cost += c.cost * n as i64;
            for (acc, &d) in consumed.iter_mut().zip(&c.demand) {
                *acc += d * n as i64;
            }
        }
        PackingResult { counts: counts.iter().map(|&n| n as u32).collect(), mbps, consumed, cost }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&n| n == 0)
    }
}

/// Depth-first search over count vectors shared by both operations.
struct Search<'a> {
    cands: &'a [Candidate],
    counts: Vec<u64>,
    left: Vec<i64>,
}

impl<'a> Search<'a> {
    fn new(cands: &'a [Candidate], residual: &[Quantity]) -> Self {
        Search {
            cands,
            counts: vec![0; cands.len()],
            left: residual.iter().map(|q| q.milli().max(0)).collect(),
        }
    }

    fn take(&mut self, u: usize, n: i64) {
        for (l, d) in self.left.iter_mut().zip(&self.cands[u].demand) {
            *l -= d.milli() * n;
        }
        self.counts[u] = (self.counts[u] as i64 + n) as u64;
    }

    fn most(&self, u: usize) -> u64 {
        self.cands[u]
            .demand
            .iter()
            .zip(&self.left)
            .filter(|(d, _)| d.milli() > 0)
            .map(|(d, &l)| (l / d.milli()) as u64)
            .min()
            .unwrap_or(0)
    }

    /// Throughput still reachable from candidates `u..` within the residual.
    fn throughput_bound(&self, u: usize) -> u64 {
        let rest = &self.cands[u..];
        let mut by_count = 0u64;
        for (k, c) in rest.iter().enumerate() {
            by_count = by_count.saturating_add(c.mbps.saturating_mul(self.most(u + k)));
        }
        // Fractional bound through any resource every remaining type uses.
        let mut best = by_count as f64;
        for (r, &l) in self.left.iter().enumerate() {
            if rest.iter().all(|c| c.demand[r].milli() > 0) {
                let ratio = rest
                    .iter()
                    .map(|c| c.mbps as f64 / c.demand[r].milli() as f64)
                    .fold(0.0, f64::max);
                best = best.min(ratio * l as f64);
            }
        }
        (best + 1e-6).floor() as u64
    }
}

fn lex(a: &[u32], b: &[u32]) -> Ordering {
    a.cmp(b)
}

/// Packing with the largest total throughput that fits in `residual`.
///
/// Ties go to the lower host cost, then to the lexicographically smaller
/// count vector.
pub fn max_throughput(residual: &[Quantity], cands: &[Candidate]) -> PackingResult {
    let kinds = residual.len();
    let mut search = Search::new(cands, residual);
    let mut best = PackingResult::from_counts(&vec![0; cands.len()], cands, kinds);
    fn go(s: &mut Search<'_>, u: usize, mbps: u64, best: &mut PackingResult, kinds: usize) {
        if u == s.cands.len() {
            if mbps >= best.mbps {
                let cand = PackingResult::from_counts(&s.counts, s.cands, kinds);
                let better = match cand.mbps.cmp(&best.mbps) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => cand.cost.cmp(&best.cost).then(lex(&cand.counts, &best.counts)).is_lt(),
                };
                if better {
                    *best = cand;
                }
            }
            return;
        }
        if mbps + s.throughput_bound(u) < best.mbps {
            return;
        }
        let q = s.cands[u].mbps;
        for n in (0..=s.most(u)).rev() {
            s.take(u, n as i64);
            go(s, u + 1, mbps + n * q, best, kinds);
            s.take(u, -(n as i64));
        }
    }
    go(&mut search, 0, 0, &mut best, kinds);
    best
}

/// Cheapest packing that fits in `residual` and provides at least `demand`
/// Mbps, or `None` if no packing does.
///
/// Ties go to the lower achieved throughput, then to the lexicographically
/// smaller count vector.
pub fn min_cost_instances(
    residual: &[Quantity],
    demand: u64,
    cands: &[Candidate],
    objective: PackingObjective,
) -> Option<PackingResult> {
    let kinds = residual.len();
    let weight: Vec<i64> = cands
        .iter()
        .map(|c| match objective {
            PackingObjective::HostCost => c.cost.cents(),
            PackingObjective::Resource(r) => c.demand.get(r).map_or(0, |q| q.milli()),
        })
        .collect();
    // Cheapest weight per Mbps among candidates `u..`, for the lower bound.
    let mut ratio = vec![f64::INFINITY; cands.len() + 1];
    for u in (0..cands.len()).rev() {
        ratio[u] = ratio[u + 1].min(weight[u] as f64 / cands[u].mbps as f64);
    }

    struct Best {
        key: (i64, u64, Vec<u32>),
    }
    let mut best: Option<Best> = None;
    let mut search = Search::new(cands, residual);

    #[allow(clippy::too_many_arguments)]
    fn go(
        s: &mut Search<'_>,
        u: usize,
        mbps: u64,
        spent: i64,
        demand: u64,
        weight: &[i64],
        ratio: &[f64],
        best: &mut Option<Best>,
    ) {
        if mbps >= demand {
            let key = (spent, mbps, s.counts.iter().map(|&n| n as u32).collect::<Vec<_>>());
            if best.as_ref().is_none_or(|b| key < b.key) {
                *best = Some(Best { key });
            }
            return;
        }
        if u == s.cands.len() {
            return;
        }
        let rem = demand - mbps;
        if let Some(b) = best {
            let bound = spent as f64 + rem as f64 * ratio[u];
            if bound > b.key.0 as f64 + 1e-9 {
                return;
            }
        }
        let q = s.cands[u].mbps;
        let cap = rem.div_ceil(q).min(s.most(u));
        for n in (0..=cap).rev() {
            s.take(u, n as i64);
            go(s, u + 1, mbps + n * q, spent + weight[u] * n as i64, demand, weight, ratio, best);
            s.take(u, -(n as i64));
        }
    }
    go(&mut search, 0, 0, 0, demand, &weight, &ratio, &mut best);
    best.map(|b| {
        let counts: Vec<u64> = b.key.2.iter().map(|&n| n as u64).collect();
        PackingResult::from_counts(&counts, cands, kinds)
    })
}

/// Whether at least one instance of some candidate fits in `residual`.
pub fn can_host(residual: &[Quantity], cands: &[Candidate]) -> bool {
    cands.iter().any(|c| c.fit(residual) > 0)
}
