mod common;

use common::packing::{oracle_max, oracle_min, random_node};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfc_core::model::Quantity;
use sfc_core::packing::{max_throughput, min_cost_instances, PackingObjective};

#[test]
fn both_operations_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..200 {
        let (residual, cands) = random_node(&mut rng);
        let max = max_throughput(&residual, &cands);
        let (counts, mbps, cost) = oracle_max(&residual, &cands);
        assert_eq!((max.counts.clone(), max.mbps, max.cost.cents()), (counts, mbps, cost), "case {case}");

        let demand = rng.random_range(0..=mbps + 50);
        let got = min_cost_instances(&residual, demand, &cands, PackingObjective::HostCost)
            .map(|p| (p.counts, p.mbps, p.cost.cents()));
        assert_eq!(got, oracle_min(&residual, demand, &cands), "case {case} demand {demand}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_cost_at_max_throughput_is_feasible(seed in any::<u64>()) {
        let (residual, cands) = random_node(&mut ChaCha8Rng::seed_from_u64(seed));
        let max = max_throughput(&residual, &cands);
        prop_assert!(min_cost_instances(&residual, max.mbps, &cands, PackingObjective::HostCost).is_some());
        prop_assert!(min_cost_instances(&residual, max.mbps + 1, &cands, PackingObjective::HostCost).is_none());
        for (used, cap) in max.consumed.iter().zip(&residual) {
            prop_assert!(used <= cap);
        }
    }

    #[test]
    fn larger_residual_never_hurts(seed in any::<u64>(), extra in 0i64..4000, demand in 0u64..400) {
        let (residual, cands) = random_node(&mut ChaCha8Rng::seed_from_u64(seed));
        let bigger: Vec<Quantity> = residual.iter().map(|&q| q + Quantity::from_milli(extra)).collect();
        prop_assert!(max_throughput(&bigger, &cands).mbps >= max_throughput(&residual, &cands).mbps);
        if let Some(small) = min_cost_instances(&residual, demand, &cands, PackingObjective::HostCost) {
            let big = min_cost_instances(&bigger, demand, &cands, PackingObjective::HostCost);
            prop_assert!(big.is_some_and(|b| b.cost <= small.cost));
        }
    }
}
