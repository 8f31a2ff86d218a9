use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::lp::solve_with_bounds;
use super::{LinearProgram, LinprogError, LpSolution, LpStatus, VarId};

/// Distance from an integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Relaxations between two runs of the rounding heuristic.
const HEURISTIC_PERIOD: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    /// Maximum number of relaxations solved.
    pub nodes: Option<usize>,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which
    /// the search stops and reports optimality.
    pub gap: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { time: None, nodes: None, gap: 1e-9 }
    }
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), LinprogError> {
        if self.time.is_some_and(|t| t.is_zero()) || self.nodes == Some(0) {
            return Err(LinprogError::Malformed("solve budgets must be positive".into()));
        }
        if !(self.gap >= 0.0) {
            return Err(LinprogError::Malformed("gap tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    FeasibleWithGap,
    Infeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOutcome {
    pub status: MilpStatus,
    /// Best integral solution found, with integer variables rounded.
    pub incumbent: Option<Vec<f64>>,
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    /// Objective of the root relaxation.
    pub root_bound: f64,
    pub nodes: usize,
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: the smallest bound, then the oldest node, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.floor()).min(v.ceil() - v)
}

/// Most fractional integer variable; ties go to the lowest index.
fn branching_var(values: &[f64], integer: &[VarId]) -> Option<VarId> {
    let mut best: Option<(VarId, f64)> = None;
    for &j in integer {
        let f = fractionality(values[j]);
        if f <= INTEGRALITY_TOL {
            continue;
        }
        match best {
            Some((bj, bf)) if f < bf - 1e-12 || (f <= bf + 1e-12 && j > bj) => {}
            _ => best = Some((j, f)),
        }
    }
    best.map(|(j, _)| j)
}

struct Search<'a> {
    lp: &'a LinearProgram,
    integer: &'a [VarId],
    limits: SolveLimits,
    start: Instant,
    nodes: usize,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    fn out_of_budget(&self) -> bool {
        self.limits.nodes.is_some_and(|n| self.nodes >= n)
            || self.limits.time.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn relax(&mut self, lower: &[f64], upper: &[f64]) -> LpSolution {
        self.nodes += 1;
        solve_with_bounds(self.lp, lower, upper)
    }

    fn offer(&mut self, objective: f64, mut values: Vec<f64>) {
        for &j in self.integer {
            values[j] = values[j].round();
        }
        if self.incumbent.as_ref().is_none_or(|(best, _)| objective < *best) {
            self.incumbent = Some((objective, values));
        }
    }

    /// Fixes the integer variables to rounded values and re-solves.
    fn round_and_fix(&mut self, values: &[f64], lower: &[f64], upper: &[f64]) {
        for round in [f64::ceil, f64::round] {
            let mut lo = lower.to_vec();
            let mut hi = upper.to_vec();
            for &j in self.integer {
                let v = round(values[j] - INTEGRALITY_TOL).clamp(lower[j], upper[j]);
                lo[j] = v;
                hi[j] = v;
            }
            let sol = self.relax(&lo, &hi);
            if sol.status == LpStatus::Optimal {
                self.offer(sol.objective, sol.values);
                return;
            }
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((best, _)) => bound >= best - self.limits.gap * best.abs().max(1.0),
            None => false,
        }
    }
}

/// Best-first branch-and-bound minimizing `lp` with `integer` variables
/// restricted to integers.
pub fn branch_and_bound(
    lp: &LinearProgram,
    integer: &[VarId],
    limits: SolveLimits,
) -> Result<BnbOutcome, LinprogError> {
    lp.validate()?;
    limits.validate()?;
    if let Some(&j) = integer.iter().find(|&&j| j >= lp.vars.len()) {
        return Err(LinprogError::Malformed(format!("integer set references var {j}")));
    }
    let mut lower: Vec<f64> = lp.vars.iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = lp.vars.iter().map(|v| v.upper).collect();
    for &j in integer {
        lower[j] = lower[j].ceil();
        upper[j] = upper[j].floor();
        if lower[j] > upper[j] {
            return Ok(infeasible(0));
        }
    }

    let mut search = Search { lp, integer, limits, start: Instant::now(), nodes: 0, incumbent: None };
    let root = search.relax(&lower, &upper);
    match root.status {
        LpStatus::Infeasible => return Ok(infeasible(search.nodes)),
        LpStatus::Unbounded => {
            return Err(LinprogError::Malformed("relaxation is unbounded".into()));
        }
        LpStatus::Optimal => {}
    }
    let root_bound = root.objective;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: root.objective, seq, lower, upper, values: root.values });
    let mut last_heuristic: Option<usize> = None;

    let mut exhausted = false;
    let bound = loop {
        let Some(node) = heap.peek() else { break f64::INFINITY };
        let node_bound = node.bound;
        if search.prunable(node_bound) {
            break node_bound;
        }
        if search.out_of_budget() {
            exhausted = true;
            break node_bound;
        }
        let node = heap.pop().expect("peeked");
        let Some(j) = branching_var(&node.values, integer) else {
            search.offer(node.bound, node.values);
            continue;
        };
        if last_heuristic.is_none_or(|n| search.nodes >= n + HEURISTIC_PERIOD) {
            last_heuristic = Some(search.nodes);
            search.round_and_fix(&node.values, &node.lower, &node.upper);
        }
        let v = node.values[j];
        for down in [true, false] {
            let mut lo = node.lower.clone();
            let mut hi = node.upper.clone();
            if down {
                hi[j] = v.floor();
            } else {
                lo[j] = v.ceil();
            }
            if lo[j] > hi[j] {
                continue;
            }
            let sol = search.relax(&lo, &hi);
            if sol.status != LpStatus::Optimal || search.prunable(sol.objective) {
                continue;
            }
            seq += 1;
            heap.push(Node { bound: sol.objective.max(node.bound), seq, lower: lo, upper: hi, values: sol.values });
        }
    };

    let nodes = search.nodes;
    Ok(match search.incumbent {
        None if exhausted => BnbOutcome {
            status: MilpStatus::BudgetExhausted,
            incumbent: None,
            objective: f64::INFINITY,
            bound,
            root_bound,
            nodes,
        },
        None => infeasible(nodes),
        Some((objective, values)) => {
            let bound = bound.min(objective);
            let closed = objective - bound <= limits.gap * objective.abs().max(1.0);
            BnbOutcome {
                status: if closed { MilpStatus::Optimal } else { MilpStatus::FeasibleWithGap },
                incumbent: Some(values),
                objective,
                bound,
                root_bound,
                nodes,
            }
        }
    })
}

fn infeasible(nodes: usize) -> BnbOutcome {
    BnbOutcome {
        status: MilpStatus::Infeasible,
        incumbent: None,
        objective: f64::INFINITY,
        bound: f64::INFINITY,
        root_bound: f64::INFINITY,
        nodes,
    }
}
