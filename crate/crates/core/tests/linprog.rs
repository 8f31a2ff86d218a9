use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfc_core::linprog::{
    branch_and_bound, solve_lp, LinearProgram, LpStatus, MilpStatus, Relation, SolveLimits,
};

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=8);
    let mut lp = LinearProgram::new();
    for j in 0..n {
        let lo = if rng.random_bool(0.2) { -(rng.random_range(0..=5) as f64) } else { 0.0 };
        let hi = lo + rng.random_range(1..=10) as f64;
        lp.add_var(format!("v{j}"), lo, hi, rng.random_range(-6..=6) as f64);
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-5..=5) as f64));
            }
        }
        let relation = match rng.random_range(0..10) {
            0 => Relation::Eq,
            1..=3 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_row(format!("r{i}"), coeffs, relation, rng.random_range(-10..=20) as f64);
    }
    lp
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[i][k] -= f * a[col][k];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum over all basic feasible solutions, or `None` when infeasible.
/// Every variable is boxed, so the optimum is attained at a vertex.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.vars.len();
    // Each candidate hyperplane as (dense coefficients, rhs).
    let mut equalities = Vec::new();
    let mut candidates = Vec::new();
    for r in &lp.rows {
        let mut dense = vec![0.0; n];
        for &(j, a) in &r.coeffs {
            dense[j] += a;
        }
        if r.relation == Relation::Eq {
            equalities.push((dense, r.rhs));
        } else {
            candidates.push((dense, r.rhs));
        }
    }
    for (j, v) in lp.vars.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        candidates.push((e.clone(), v.lower));
        candidates.push((e, v.upper));
    }
    if equalities.len() > n {
        // Overdetermined: fall back to trying every n-subset of equalities.
        candidates.extend(equalities.drain(..));
    }
    let need = n - equalities.len();
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(need);
    fn recurse(
        start: usize,
        need: usize,
        pick: &mut Vec<usize>,
        candidates: &[(Vec<f64>, f64)],
        equalities: &[(Vec<f64>, f64)],
        lp: &LinearProgram,
        best: &mut Option<f64>,
    ) {
        if pick.len() == need {
            let rows: Vec<&(Vec<f64>, f64)> =
                equalities.iter().chain(pick.iter().map(|&i| &candidates[i])).collect();
            let a = rows.iter().map(|r| r.0.clone()).collect();
            let b = rows.iter().map(|r| r.1).collect();
            if let Some(x) = solve_square(a, b) {
                if lp.max_violation(&x) <= 1e-7 {
                    let obj = lp.objective_value(&x);
                    if best.is_none_or(|b| obj < b) {
                        *best = Some(obj);
                    }
                }
            }
            return;
        }
        for i in start..candidates.len() {
            pick.push(i);
            recurse(i + 1, need, pick, candidates, equalities, lp, best);
            pick.pop();
        }
    }
    recurse(0, need, &mut pick, &candidates, &equalities, lp, &mut best);
    best
}

#[test]
fn simplex_matches_vertex_enumeration_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..100 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            Some(expected) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                let tol = 1e-7 * expected.abs().max(1.0);
                assert!((sol.objective - expected).abs() <= tol, "case {case}: {} vs {expected}", sol.objective);
                assert!(lp.max_violation(&sol.values) <= 1e-7, "case {case}");
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
                infeasible += 1;
            }
        }
    }
    assert!(optimal >= 30 && infeasible >= 1, "optimal {optimal}, infeasible {infeasible}");
}

#[test]
fn branch_and_bound_matches_enumeration_on_small_integer_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let mut lp = random_lp(&mut rng);
        for v in lp.vars.iter_mut() {
            v.upper = v.upper.min(v.lower + 4.0);
        }
        let n = lp.vars.len().min(4);
        let integer: Vec<usize> = (0..n).collect();
        let out = branch_and_bound(&lp, &integer, SolveLimits::unlimited()).unwrap();

        // Enumerate the integer box, solving the continuous rest as an LP.
        let mut best: Option<f64> = None;
        let ranges: Vec<Vec<f64>> = integer
            .iter()
            .map(|&j| {
                let (lo, hi) = (lp.vars[j].lower as i64, lp.vars[j].upper as i64);
                (lo..=hi).map(|v| v as f64).collect()
            })
            .collect();
        let mut idx = vec![0usize; n];
        loop {
            let mut fixed = lp.clone();
            for (k, &j) in integer.iter().enumerate() {
                fixed.vars[j].lower = ranges[k][idx[k]];
                fixed.vars[j].upper = ranges[k][idx[k]];
            }
            let s = solve_lp(&fixed).unwrap();
            if s.status == LpStatus::Optimal && best.is_none_or(|b| s.objective < b) {
                best = Some(s.objective);
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < ranges[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        match best {
            Some(b) => {
                assert_eq!(out.status, MilpStatus::Optimal, "case {case}");
                assert!((out.objective - b).abs() <= 1e-7 * b.abs().max(1.0), "case {case}: {} vs {b}", out.objective);
                assert!(out.root_bound <= out.objective + 1e-7);
            }
            None => assert_eq!(out.status, MilpStatus::Infeasible, "case {case}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_invariant_under_row_permutation(seed in any::<u64>(), shuffle in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng);
        let mut permuted = lp.clone();
        permuted.rows.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&permuted).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-7 * a.objective.abs().max(1.0));
        }
    }
}
