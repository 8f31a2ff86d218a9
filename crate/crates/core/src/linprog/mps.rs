use std::collections::BTreeSet;
use std::fmt::Write;

use super::{LinearProgram, Relation, VarId};

/// Free-form MPS text for cross-checking with external solvers.
///
/// Names are sanitized to MPS-safe tokens; integer variables are wrapped in
/// `MARKER` lines.
pub fn write_mps(lp: &LinearProgram, integer: &[VarId]) -> String {
    let var_name = |j: VarId| format!("C{j}_{}", sanitize(&lp.vars[j].name));
    let row_name = |i: usize| format!("R{i}_{}", sanitize(&lp.rows[i].name));
    let integer: BTreeSet<VarId> = integer.iter().copied().collect();

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.vars.len()];
    for (i, r) in lp.rows.iter().enumerate() {
        for &(j, a) in &r.coeffs {
            columns[j].push((i, a));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME placement");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N COST");
    for (i, r) in lp.rows.iter().enumerate() {
        let kind = match r.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        let _ = writeln!(out, " {kind} {}", row_name(i));
    }
    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    for j in 0..lp.vars.len() {
        let is_int = integer.contains(&j);
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER 'MARKER' '{tag}'");
            in_int = is_int;
        }
        let name = var_name(j);
        if lp.objective[j] != 0.0 {
            let _ = writeln!(out, " {name} COST {}", lp.objective[j]);
        }
        for &(i, a) in &columns[j] {
            let _ = writeln!(out, " {name} {} {a}", row_name(i));
        }
        if lp.objective[j] == 0.0 && columns[j].is_empty() {
            let _ = writeln!(out, " {name} COST 0");
        }
    }
    if in_int {
        let _ = writeln!(out, " MARKER 'MARKER' 'INTEND'");
    }
    let _ = writeln!(out, "RHS");
    for (i, r) in lp.rows.iter().enumerate() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, " RHS {} {}", row_name(i), r.rhs);
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for (j, v) in lp.vars.iter().enumerate() {
        let name = var_name(j);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            _ if v.lower == v.upper => {
                let _ = writeln!(out, " FX BND {name} {}", v.lower);
            }
            (false, false) => {
                let _ = writeln!(out, " FR BND {name}");
            }
            (lo, hi) => {
                if !lo {
                    let _ = writeln!(out, " MI BND {name}");
                } else if v.lower != 0.0 {
                    let _ = writeln!(out, " LO BND {name} {}", v.lower);
                }
                if hi {
                    let _ = writeln!(out, " UP BND {name} {}", v.upper);
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}
