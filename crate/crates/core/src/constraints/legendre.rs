use crate::symbolic::{PhaseExpr, PhaseSpace, VarKind};

use super::{ConstraintError, SystemDef};

/// Name of the velocity symbol of coordinate `q`.
pub fn velocity_symbol(q: &str) -> String {
    format!("{q}_dot")
}

/// A Lagrangian at most quadratic in the velocities `q_dot`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDef {
    pub coordinates: Vec<String>,
    pub lagrangian: PhaseExpr,
}

impl LagrangianDef {
    pub fn new(coordinates: &[&str], lagrangian: PhaseExpr) -> Self {
        LagrangianDef {
            coordinates: coordinates.iter().map(|s| s.to_string()).collect(),
            lagrangian,
        }
    }

    pub fn velocities(&self) -> Vec<String> {
        self.coordinates.iter().map(|q| velocity_symbol(q)).collect()
    }
}

pub(crate) fn multiplier_names(n: usize) -> Vec<String> {
    match n {
        0 => Vec::new(),
        1 => vec!["mu".to_string()],
        _ => (1..=n).map(|i| format!("mu{i}")).collect(),
    }
}

struct Row {
    hessian: Vec<PhaseExpr>,
    rhs: PhaseExpr,
}

/// Legendre transform with primary constraints for the singular directions.
///
/// Momenta `p_s = ∂L/∂q̇_s` are solved for as many velocities as the velocity
/// Hessian allows, pivoting only on entries invertible inside the expression
/// class (`c·exp(linear)`). Rows left without a pivot become primary
/// constraints; undetermined velocities are set to zero in `H_C`, which changes
/// it only by multiples of the primaries.
pub fn legendre(ld: &LagrangianDef) -> Result<SystemDef, ConstraintError> {
    let velocities = ld.velocities();
    let l = &ld.lagrangian;
    for v in l.variables() {
        if !ld.coordinates.contains(&v) && !velocities.contains(&v) {
            return Err(ConstraintError::UnsupportedLagrangian(format!(
                "`{v}` is neither a coordinate nor a velocity"
            )));
        }
    }
    for v in &velocities {
        if l.polynomial_degree_in(v).is_none() {
            return Err(ConstraintError::UnsupportedLagrangian(format!(
                "velocity `{v}` appears inside an exponential"
            )))
        }
    }
    for (key, _) in l.terms() {
        let deg: u32 = velocities.iter().map(|v| key.monomial.power_of(v)).sum();
        if deg > 2 {
            return Err(ConstraintError::UnsupportedLagrangian(
                "cubic or higher velocity dependence".into(),
            ));
        }
    }

    let zero_velocities = |e: &PhaseExpr| -> Result<PhaseExpr, ConstraintError> {
        let mut out = e.clone();
        for v in &velocities {
            out = out.substitute(v, &PhaseExpr::zero())?;
        }
        Ok(out)
    };

    let n = ld.coordinates.len();
    let mut rows = Vec::with_capacity(n);
    for (s, q) in ld.coordinates.iter().enumerate() {
        let dl = l.diff(&velocities[s]);
        let hessian = velocities.iter().map(|vt| dl.diff(vt)).collect();
        let rhs = PhaseExpr::var(&format!("p_{q}")) - zero_velocities(&dl)?;
        rows.push(Row { hessian, rhs });
    }

    // Gauss–Jordan over the velocity columns.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    for col in 0..n {
        let Some(r) = (0..n).find(|&r| !used[r] && rows[r].hessian[col].is_unit()) else {
            continue;
        };
        let inv = rows[r].hessian[col].inverse_unit().expect("unit pivot");
        rows[r].hessian = rows[r].hessian.iter().map(|e| e * &inv).collect();
        rows[r].rhs = &rows[r].rhs * &inv;
        for other in 0..n {
            if other == r || rows[other].hessian[col].is_zero() {
                continue;
            }
            let f = rows[other].hessian[col].clone();
            let pivot_row = rows[r].hessian.clone();
            let pivot_rhs = rows[r].rhs.clone();
            for (t, pv) in pivot_row.iter().enumerate() {
                rows[other].hessian[t] = &rows[other].hessian[t] - &(&f * pv);
            }
            rows[other].rhs = &rows[other].rhs - &(&f * &pivot_rhs);
        }
        used[r] = true;
        pivot_of_col[col] = Some(r);
    }

    let mut primaries = Vec::new();
    for r in 0..n {
        if used[r] {
            continue;
        }
        if rows[r].hessian.iter().any(|e| !e.is_zero()) {
            return Err(ConstraintError::UnsupportedLagrangian(
                "velocity Hessian has entries that cannot be inverted symbolically".into(),
            ));
        }
        let c = rows[r].rhs.clone();
        let momenta: Vec<String> = ld.coordinates.iter().map(|q| format!("p_{q}")).collect();
        if !c.variables().iter().any(|v| momenta.contains(v)) {
            return Err(ConstraintError::InconsistentMomenta(c.to_string()));
        }
        primaries.push(c);
    }

    let mut h = PhaseExpr::zero();
    for (s, q) in ld.coordinates.iter().enumerate() {
        h = h + PhaseExpr::var(&velocities[s]) * PhaseExpr::var(&format!("p_{q}"));
    }
    h = h - l.clone();
    for (col, v) in velocities.iter().enumerate() {
        let value = match pivot_of_col[col] {
            Some(r) => zero_velocities(&rows[r].rhs)?,
            None => PhaseExpr::zero(),
        };
        h = h.substitute(v, &value)?;
    }

    let coords: Vec<&str> = ld.coordinates.iter().map(String::as_str).collect();
    let mut space = PhaseSpace::canonical(&coords);
    let multipliers = multiplier_names(primaries.len());
    for m in &multipliers {
        if space.get(m).is_some_and(|v| v.kind != VarKind::Parameter) {
            return Err(ConstraintError::InvalidSystem(format!("multiplier name `{m}` is taken")));
        }
        space = space.with_parameter(m)?;
    }
    SystemDef::new(space, h, primaries, multipliers)
}
