use serde::Serialize;

use super::LinprogError;

pub type VarId = usize;
pub type RowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c·x` subject to sparse linear rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub vars: Vec<Variable>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.vars.push(Variable { name: name.into(), lower, upper });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> RowId {
        self.rows.push(Row { name: name.into(), coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn validate(&self) -> Result<(), LinprogError> {
        if self.objective.len() != self.vars.len() {
            return Err(LinprogError::Malformed("objective length differs from variable count".into()));
        }
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LinprogError::Malformed(format!("bad bounds on `{}`", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LinprogError::Malformed(format!("empty domain for `{}`", v.name)));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LinprogError::Malformed(format!("non-finite rhs in `{}`", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.vars.len() {
                    return Err(LinprogError::Malformed(format!("row `{}` references var {j}", r.name)));
                }
                if !a.is_finite() {
                    return Err(LinprogError::Malformed(format!("non-finite coefficient in `{}`", r.name)));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound by `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let viol = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the original variables; meaningful when optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LinprogError> {
    lp.validate()?;
    let lower: Vec<f64> = lp.vars.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = lp.vars.iter().map(|v| v.upper).collect();
    Ok(solve_with_bounds(lp, &lower, &upper))
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

/// How a tableau column maps back to an original variable.
#[derive(Debug, Clone, Copy)]
struct ColumnMap {
    var: VarId,
    sign: f64,
}

/// Solves `lp` with its variable bounds replaced by `lower`/`upper`.
/// Bounds must satisfy `lower <= upper`; the caller validated the LP.
pub(crate) fn solve_with_bounds(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> LpSolution {
    let n = lp.vars.len();
    // Each variable is either fixed, shifted by a finite bound, or split.
    let mut offset = vec![0.0; n];
    let mut columns: Vec<ColumnMap> = Vec::new();
    let mut col_upper: Vec<f64> = Vec::new();
    let mut var_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        let (lo, hi) = (lower[j], upper[j]);
        if lo == hi {
            offset[j] = lo;
        } else if lo.is_finite() {
            offset[j] = lo;
            var_cols[j].push((columns.len(), 1.0));
            columns.push(ColumnMap { var: j, sign: 1.0 });
            col_upper.push(hi - lo);
        } else if hi.is_finite() {
            offset[j] = hi;
            var_cols[j].push((columns.len(), -1.0));
            columns.push(ColumnMap { var: j, sign: -1.0 });
            col_upper.push(f64::INFINITY);
        } else {
            var_cols[j].push((columns.len(), 1.0));
            columns.push(ColumnMap { var: j, sign: 1.0 });
            col_upper.push(f64::INFINITY);
            var_cols[j].push((columns.len(), -1.0));
            columns.push(ColumnMap { var: j, sign: -1.0 });
            col_upper.push(f64::INFINITY);
        }
    }
    let structural = columns.len();

    let infeasible = || LpSolution {
        status: LpStatus::Infeasible,
        values: offset.clone(),
        objective: f64::NAN,
        pivots: 0,
    };

    // Rows in column space with constants moved to the right-hand side.
    struct WorkRow {
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    }
    let mut work = Vec::with_capacity(lp.rows.len());
    let mut max_rhs: f64 = 0.0;
    for r in &lp.rows {
        let mut rhs = r.rhs;
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(r.coeffs.len());
        for &(j, a) in &r.coeffs {
            rhs -= a * offset[j];
            for &(c, s) in &var_cols[j] {
                coeffs.push((c, a * s));
            }
        }
        coeffs.retain(|&(_, a)| a != 0.0);
        max_rhs = max_rhs.max(rhs.abs());
        if coeffs.is_empty() {
            let tol = 1e-9 * (1.0 + r.rhs.abs());
            let ok = match r.relation {
                Relation::Le => rhs >= -tol,
                Relation::Ge => rhs <= tol,
                Relation::Eq => rhs.abs() <= tol,
            };
            if !ok {
                return infeasible();
            }
            continue;
        }
        work.push(WorkRow { coeffs, relation: r.relation, rhs });
    }
    let m = work.len();

    // Slack columns, then artificial columns where no slack can start basic.
    let mut slack_of_row = vec![None; m];
    for (i, w) in work.iter().enumerate() {
        if w.relation != Relation::Eq {
            slack_of_row[i] = Some(columns.len());
            columns.push(ColumnMap { var: usize::MAX, sign: 1.0 });
            col_upper.push(f64::INFINITY);
        }
    }
    let art_start = columns.len();
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut beta = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut pending_art = Vec::new();
    for (i, w) in work.iter().enumerate() {
        let flip = w.rhs < 0.0;
        let s = if flip { -1.0 } else { 1.0 };
        let mut row = vec![0.0; art_start];
        for &(c, a) in &w.coeffs {
            row[c] += s * a;
        }
        let slack_coeff = match w.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
            Relation::Eq => 0.0,
        } * s;
        if let Some(sc) = slack_of_row[i] {
            row[sc] = slack_coeff;
        }
        beta[i] = s * w.rhs;
        if slack_coeff == 1.0 {
            basis[i] = slack_of_row[i].expect("slack exists");
        } else {
            pending_art.push(i);
        }
        tableau.push(row);
    }
    let total_cols = art_start + pending_art.len();
    for row in tableau.iter_mut() {
        row.resize(total_cols, 0.0);
    }
    for (k, &i) in pending_art.iter().enumerate() {
        let c = art_start + k;
        tableau[i][c] = 1.0;
        basis[i] = c;
        columns.push(ColumnMap { var: usize::MAX, sign: 1.0 });
        col_upper.push(f64::INFINITY);
    }
    debug_assert_eq!(columns.len(), total_cols);

    let mut simplex = Tableau {
        rows: tableau,
        beta,
        basis,
        upper: col_upper,
        at_upper: vec![false; total_cols],
        is_basic: vec![false; total_cols],
        reduced: vec![0.0; total_cols],
        pivots: 0,
    };
    for &b in &simplex.basis {
        simplex.is_basic[b] = true;
    }

    // Phase 1: minimize the sum of artificials.
    if total_cols > art_start {
        let mut cost = vec![0.0; total_cols];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        simplex.price(&cost);
        let status = simplex.run(total_cols);
        debug_assert_ne!(status, LpStatus::Unbounded);
        let infeas: f64 = simplex
            .basis
            .iter()
            .zip(&simplex.beta)
            .filter(|(&b, _)| b >= art_start)
            .map(|(_, &v)| v)
            .sum();
        if infeas > 1e-7 * (1.0 + max_rhs) {
            let mut sol = infeasible();
            sol.pivots = simplex.pivots;
            return sol;
        }
        for c in art_start..total_cols {
            simplex.upper[c] = 0.0;
        }
        simplex.drive_out_artificials(art_start);
    }

    // Phase 2.
    let mut cost = vec![0.0; total_cols];
    for (c, map) in columns.iter().enumerate().take(structural) {
        cost[c] = lp.objective[map.var] * map.sign;
    }
    simplex.price(&cost);
    let status = simplex.run(art_start);
    let pivots = simplex.pivots;
    if status == LpStatus::Unbounded {
        return LpSolution { status, values: offset, objective: f64::NEG_INFINITY, pivots };
    }

    let mut col_value = vec![0.0; total_cols];
    for c in 0..total_cols {
        if simplex.at_upper[c] {
            col_value[c] = simplex.upper[c];
        }
    }
    for (i, &b) in simplex.basis.iter().enumerate() {
        col_value[b] = simplex.beta[i];
    }
    let mut values = offset;
    for (c, map) in columns.iter().enumerate().take(structural) {
        values[map.var] += map.sign * col_value[c];
    }
    for j in 0..n {
        values[j] = values[j].clamp(lower[j], upper[j]);
    }
    let objective = lp.objective_value(&values);
    LpSolution { status: LpStatus::Optimal, values, objective, pivots }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Current value of each basic column.
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    /// Nonbasic columns sitting at their upper bound.
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    reduced: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn price(&mut self, cost: &[f64]) {
        self.reduced.clone_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (d, &t) in self.reduced.iter_mut().zip(&self.rows[i]) {
                    *d -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    /// Primal simplex over columns `< enter_limit`.
    fn run(&mut self, enter_limit: usize) -> LpStatus {
        let mut bland = false;
        let mut degenerate = 0usize;
        let m = self.rows.len();
        loop {
            // Pricing.
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..enter_limit {
                if self.is_basic[j] || self.upper[j] == 0.0 {
                    continue;
                }
                let d = self.reduced[j];
                let score = if self.at_upper[j] { d } else { -d };
                if score > COST_TOL {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if score > best {
                        best = score;
                        entering = Some(j);
                    }
                }
            }
            let Some(j) = entering else {
                return LpStatus::Optimal;
            };
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // Ratio test.
            let mut step = self.upper[j];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..m {
                let alpha = self.rows[i][j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = dir * alpha;
                let (limit, to_upper) = if rate > 0.0 {
                    (self.beta[i].max(0.0) / rate, false)
                } else if self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -rate, true)
                } else {
                    continue;
                };
                let better = if limit < step - ZERO_TOL {
                    true
                } else if limit <= step + ZERO_TOL {
                    match leave {
                        // Equal to the bound flip: prefer the flip.
                        None => false,
                        Some((li, _)) if bland => b < self.basis[li],
                        Some(_) => alpha.abs() > leave_alpha,
                    }
                } else {
                    false
                };
                if better {
                    step = step.min(limit);
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }
            if step.is_infinite() {
                return LpStatus::Unbounded;
            }
            if step <= ZERO_TOL {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }

            let delta = dir * step;
            if delta != 0.0 {
                for i in 0..m {
                    let alpha = self.rows[i][j];
                    if alpha != 0.0 {
                        self.beta[i] -= alpha * delta;
                    }
                }
            }
            match leave {
                None => {
                    // Bound flip, no basis change.
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((r, to_upper)) => {
                    let old = self.basis[r];
                    let entering_value = if self.at_upper[j] { self.upper[j] - step } else { step };
                    self.is_basic[old] = false;
                    self.at_upper[old] = to_upper;
                    self.is_basic[j] = true;
                    self.at_upper[j] = false;
                    self.basis[r] = j;
                    self.beta[r] = entering_value;
                    self.pivot(r, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        self.pivots += 1;
        let inv = 1.0 / self.rows[r][j];
        let mut pivot_row = std::mem::take(&mut self.rows[r]);
        let mut nz = Vec::new();
        for (c, v) in pivot_row.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < ZERO_TOL {
                    *v = 0.0;
                } else {
                    nz.push(c);
                }
            }
        }
        pivot_row[j] = 1.0;
        for row in self.rows.iter_mut() {
            if row.is_empty() {
                continue;
            }
            let f = row[j];
            if f == 0.0 {
                continue;
            }
            for &c in &nz {
                let v = row[c] - f * pivot_row[c];
                row[c] = if v.abs() < ZERO_TOL { 0.0 } else { v };
            }
            row[j] = 0.0;
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for &c in &nz {
                self.reduced[c] -= f * pivot_row[c];
            }
            self.reduced[j] = 0.0;
        }
        self.rows[r] = pivot_row;
    }

    /// Pivots basic artificials (value zero after phase 1) out of the basis
    /// wherever a non-artificial column can take their place.
    fn drive_out_artificials(&mut self, art_start: usize) {
        for r in 0..self.rows.len() {
            if self.basis[r] < art_start {
                continue;
            }
            let candidate = (0..art_start)
                .filter(|&c| !self.is_basic[c] && self.upper[c] > 0.0)
                .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
            let Some(c) = candidate else { continue };
            if self.rows[r][c].abs() <= 1e-7 {
                continue;
            }
            let old = self.basis[r];
            let value = if self.at_upper[c] { self.upper[c] } else { 0.0 };
            // The artificial is at zero, so the other basics do not move.
            self.is_basic[old] = false;
            self.at_upper[old] = false;
            self.is_basic[c] = true;
            self.at_upper[c] = false;
            self.basis[r] = c;
            self.beta[r] = value;
            self.pivot(r, c);
        }
    }
}
