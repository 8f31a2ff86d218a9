use super::{LinearProgram, LinprogError, Relation, RowId, VarId};

/// Adds `z = y * x` for a binary `y` and `0 <= x <= gamma`.
///
/// Emits `z >= 0`, `z <= gamma * y`, `z <= x` and `z >= x - gamma * (1 - y)`.
/// With `y = 0` the first two force `z = 0`; with `y = 1` the last two force
/// `z = x`.
pub fn linearize_product(
    lp: &mut LinearProgram,
    y: VarId,
    x: VarId,
    gamma: f64,
) -> Result<(VarId, [RowId; 4]), LinprogError> {
    let yv = &lp.vars[y];
    if yv.lower < 0.0 || yv.upper > 1.0 {
        return Err(LinprogError::NotBinary(yv.name.clone()));
    }
    let xv = &lp.vars[x];
    if !(gamma > 0.0) || xv.upper > gamma || xv.lower < 0.0 {
        return Err(LinprogError::GammaTooSmall { gamma, bound: xv.upper });
    }
    let name = format!("{}*{}", lp.vars[y].name, lp.vars[x].name);
    let z = lp.add_var(name.clone(), f64::NEG_INFINITY, f64::INFINITY, 0.0);
    let rows = [
        lp.add_row(format!("{name}:nonneg"), vec![(z, 1.0)], Relation::Ge, 0.0),
        lp.add_row(format!("{name}:off"), vec![(z, 1.0), (y, -gamma)], Relation::Le, 0.0),
        lp.add_row(format!("{name}:le_x"), vec![(z, 1.0), (x, -1.0)], Relation::Le, 0.0),
        // z >= x - gamma + gamma * y
        lp.add_row(format!("{name}:on"), vec![(z, 1.0), (x, -1.0), (y, -gamma)], Relation::Ge, -gamma),
    ];
    Ok((z, rows))
}
