use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::{PhaseExpr, PhasePoint};
use super::SymbolicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Coordinate,
    Momentum,
    Parameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub conjugate: Option<String>,
}

impl Variable {
    pub fn parameter(name: &str) -> Self {
        Variable {
            name: name.to_string(),
            kind: VarKind::Parameter,
            conjugate: None,
        }
    }
}

/// Declared variables with their canonical pairing.
///
/// Coordinates and momenta are paired one-to-one; parameters (multipliers,
/// velocities of a Lagrangian) carry no conjugate and commute with everything.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhaseSpace {
    vars: Vec<Variable>,
    index: BTreeMap<String, usize>,
}

impl PhaseSpace {
    pub fn new(vars: Vec<Variable>) -> Result<Self, SymbolicError> {
        let mut index = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(SymbolicError::InvalidSpace(format!(
                    "variable `{}` declared twice",
                    v.name
                )));
            }
        }
        let space = PhaseSpace { vars, index };
        for v in &space.vars {
            match (v.kind, &v.conjugate) {
                (VarKind::Parameter, None) => {}
                (VarKind::Parameter, Some(_)) => {
                    return Err(SymbolicError::InvalidSpace(format!(
                        "parameter `{}` cannot have a conjugate",
                        v.name
                    )))
                }
                (_, None) => {
                    return Err(SymbolicError::InvalidSpace(format!(
                        "`{}` has no conjugate",
                        v.name
                    )))
                }
                (kind, Some(c)) => {
                    let other = space.get(c).ok_or_else(|| {
                        SymbolicError::InvalidSpace(format!("conjugate `{c}` of `{}` is undeclared", v.name))
                    })?;
                    let expected = match kind {
                        VarKind::Coordinate => VarKind::Momentum,
                        _ => VarKind::Coordinate,
                    };
                    if other.kind != expected || other.conjugate.as_deref() != Some(v.name.as_str()) {
                        return Err(SymbolicError::InvalidSpace(format!(
                            "pairing `{}` <-> `{c}` is not a coordinate/momentum bijection",
                            v.name
                        )));
                    }
                }
            }
        }
        Ok(space)
    }

    /// Coordinates `q` paired with momenta `p_q`.
    pub fn canonical(coordinates: &[&str]) -> Self {
        let mut vars = Vec::new();
        for q in coordinates {
            vars.push(Variable {
                name: q.to_string(),
                kind: VarKind::Coordinate,
                conjugate: Some(format!("p_{q}")),
            });
        }
        for q in coordinates {
            vars.push(Variable {
                name: format!("p_{q}"),
                kind: VarKind::Momentum,
                conjugate: Some(q.to_string()),
            });
        }
        PhaseSpace::new(vars).expect("generated pairing is consistent")
    }

    pub fn with_parameter(mut self, name: &str) -> Result<Self, SymbolicError> {
        self.vars.push(Variable::parameter(name));
        PhaseSpace::new(self.vars)
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.index.get(name).map(|&i| &self.vars[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    /// `(coordinate, momentum)` pairs in declaration order of the coordinates.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Coordinate)
            .map(|v| (v.name.clone(), v.conjugate.clone().unwrap()))
            .collect()
    }

    /// Coordinates and momenta, coordinates first.
    pub fn phase_variables(&self) -> Vec<String> {
        let pairs = self.pairs();
        pairs
            .iter()
            .map(|(q, _)| q.clone())
            .chain(pairs.iter().map(|(_, p)| p.clone()))
            .collect()
    }

    pub fn parameters(&self) -> Vec<String> {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Parameter)
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn derivative(&self, f: &PhaseExpr, name: &str) -> Result<PhaseExpr, SymbolicError> {
        if !self.contains(name) {
            return Err(SymbolicError::UnknownVariable(name.to_string()));
        }
        Ok(f.diff(name))
    }

    fn check_bracketable(&self, f: &PhaseExpr) -> Result<(), SymbolicError> {
        for v in f.variables() {
            match self.get(&v) {
                None => return Err(SymbolicError::UnknownVariable(v)),
                Some(var) if var.kind != VarKind::Parameter && var.conjugate.is_none() => {
                    return Err(SymbolicError::NoConjugate(v))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `{f, g} = Σ_s (∂f/∂q^s ∂g/∂p_s − ∂f/∂p_s ∂g/∂q^s)`.
    pub fn poisson(&self, f: &PhaseExpr, g: &PhaseExpr) -> Result<PhaseExpr, SymbolicError> {
        self.check_bracketable(f)?;
        self.check_bracketable(g)?;
        let mut out = PhaseExpr::zero();
        for (q, p) in self.pairs() {
            let dfq = f.diff(&q);
            let dgp = g.diff(&p);
            if !dfq.is_zero() && !dgp.is_zero() {
                out = out + &dfq * &dgp;
            }
            let dfp = f.diff(&p);
            let dgq = g.diff(&q);
            if !dfp.is_zero() && !dgq.is_zero() {
                out = out - &dfp * &dgq;
            }
        }
        Ok(out)
    }

    /// Point validity: every declared phase variable has a finite value.
    pub fn check_point(&self, pt: &PhasePoint) -> Result<(), SymbolicError> {
        for v in self.phase_variables() {
            match pt.get(&v) {
                Some(x) if x.is_finite() => {}
                _ => return Err(SymbolicError::MissingValue(v)),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn e(s: &str) -> PhaseExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn canonical_pair_bracket() {
        let s = PhaseSpace::canonical(&["x"]);
        assert_eq!(s.poisson(&e("x"), &e("p_x")).unwrap(), PhaseExpr::one());
        assert_eq!(s.poisson(&e("p_x"), &e("x")).unwrap(), PhaseExpr::int(-1));
    }

    #[test]
    fn secondary_constraints_of_both_counterexamples() {
        let s = PhaseSpace::canonical(&["x", "y"]).with_parameter("mu").unwrap();
        let ht = e("1/2*exp(-y)*p_x^2 + mu*p_y");
        assert_eq!(s.poisson(&e("p_y"), &ht).unwrap(), e("1/2*exp(-y)*p_x^2"));

        let s = PhaseSpace::canonical(&["x", "y", "z"]).with_parameter("mu").unwrap();
        let ht = e("p_x*p_z - 1/2*y*z^2 + mu*p_y");
        assert_eq!(s.poisson(&e("p_y"), &ht).unwrap(), e("1/2*z^2"));
    }

    #[test]
    fn bracket_errors() {
        let s = PhaseSpace::canonical(&["x"]);
        assert!(matches!(
            s.poisson(&e("w"), &e("x")),
            Err(SymbolicError::UnknownVariable(_))
        ));
        assert!(matches!(
            s.derivative(&e("x"), "q"),
            Err(SymbolicError::UnknownVariable(_))
        ));
    }

    #[test]
    fn rejects_broken_pairings() {
        let bad = vec![
            Variable {
                name: "x".into(),
                kind: VarKind::Coordinate,
                conjugate: Some("p".into()),
            },
            Variable {
                name: "p".into(),
                kind: VarKind::Momentum,
                conjugate: Some("y".into()),
            },
            Variable {
                name: "y".into(),
                kind: VarKind::Coordinate,
                conjugate: Some("p".into()),
            },
        ];
        assert!(PhaseSpace::new(bad).is_err());
        let dup = vec![Variable::parameter("a"), Variable::parameter("a")];
        assert!(PhaseSpace::new(dup).is_err());
        let lonely = vec![Variable {
            name: "x".into(),
            kind: VarKind::Coordinate,
            conjugate: None,
        }];
        assert!(PhaseSpace::new(lonely).is_err());
    }
}
