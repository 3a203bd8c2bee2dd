use std::collections::BTreeMap;

use crate::symbolic::{PhaseExpr, PhaseSpace, VarKind};

use super::ConstraintError;

/// One defining relation of a constraint surface, with optional declared roots.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceElement {
    pub expr: PhaseExpr,
    pub roots: Vec<PhaseExpr>,
}

impl SurfaceElement {
    pub fn plain(expr: PhaseExpr) -> Self {
        SurfaceElement { expr, roots: Vec::new() }
    }

    pub fn rooted(expr: PhaseExpr, roots: Vec<PhaseExpr>) -> Self {
        SurfaceElement { expr, roots }
    }
}

/// Constraint surface in solved form: each entry `v -> rhs` eliminates `v`,
/// and no right-hand side mentions an eliminated variable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Surface {
    solved: BTreeMap<String, PhaseExpr>,
    order: Vec<String>,
}

fn preference(space: &PhaseSpace, name: &str, mentioned: &[String]) -> (u8, String) {
    let rank = match space.get(name).map(|v| (v.kind, v.conjugate.clone())) {
        Some((VarKind::Coordinate, Some(p))) if mentioned.contains(&p) => 0,
        Some((VarKind::Coordinate, _)) => 1,
        Some((VarKind::Momentum, _)) => 2,
        _ => 3,
    };
    (rank, name.to_string())
}

impl Surface {
    /// Solve each element (or its roots) for one variable, in order.
    ///
    /// Variable choice: coordinates whose momentum is itself constrained come
    /// first, then other coordinates, then momenta; ties break by name.
    pub fn new(space: &PhaseSpace, elements: &[SurfaceElement]) -> Result<Self, ConstraintError> {
        let mut relations: Vec<PhaseExpr> = Vec::new();
        for el in elements {
            if el.roots.is_empty() {
                relations.push(el.expr.clone());
            } else {
                relations.extend(el.roots.iter().cloned());
            }
        }
        let mentioned: Vec<String> = relations
            .iter()
            .flat_map(|r| r.variables().into_iter())
            .collect();

        let mut surface = Surface::default();
        for (rel, el) in relations.iter().zip(origin_of(elements)) {
            let r = surface.reduce(rel)?;
            if r.is_zero() {
                continue;
            }
            if r.is_constant() {
                return Err(ConstraintError::InconsistentSurface(el.expr.to_string()));
            }
            let mut candidates: Vec<(u8, String, PhaseExpr)> = r
                .variables()
                .into_iter()
                .filter(|v| space.get(v).is_some_and(|var| var.kind != VarKind::Parameter))
                .filter_map(|v| {
                    r.linear_split(&v).map(|(c, rest)| {
                        let (rank, name) = preference(space, &v, &mentioned);
                        (rank, name, (-rest).scale(&c.recip()))
                    })
                })
                .collect();
            candidates.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            let Some((_, var, rhs)) = candidates.into_iter().next() else {
                return Err(ConstraintError::IrreducibleConstraint(el.expr.to_string()));
            };
            surface.insert(var, rhs)?;
        }
        Ok(surface)
    }

    fn insert(&mut self, var: String, rhs: PhaseExpr) -> Result<(), ConstraintError> {
        for v in self.order.clone() {
            let old = self.solved[&v].clone();
            let new = old.substitute(&var, &rhs)?;
            self.solved.insert(v, new);
        }
        self.solved.insert(var.clone(), rhs);
        self.order.push(var);
        Ok(())
    }

    /// `f` restricted to the surface.
    pub fn reduce(&self, f: &PhaseExpr) -> Result<PhaseExpr, ConstraintError> {
        let mut out = f.clone();
        for v in &self.order {
            if out.contains(v) {
                out = out.substitute(v, &self.solved[v])?;
            }
        }
        Ok(out)
    }

    pub fn solved(&self) -> impl Iterator<Item = (&str, &PhaseExpr)> {
        self.order.iter().map(|v| (v.as_str(), &self.solved[v]))
    }

    pub fn eliminates(&self, name: &str) -> bool {
        self.solved.contains_key(name)
    }
}

fn origin_of(elements: &[SurfaceElement]) -> Vec<&SurfaceElement> {
    let mut out = Vec::new();
    for el in elements {
        let n = el.roots.len().max(1);
        out.extend(std::iter::repeat_n(el, n));
    }
    out
}

/// Reduce `f` modulo the surface cut out by `surface`.
pub fn reduce_mod_surface(
    space: &PhaseSpace,
    f: &PhaseExpr,
    surface: &[SurfaceElement],
) -> Result<PhaseExpr, ConstraintError> {
    Surface::new(space, surface)?.reduce(f)
}
