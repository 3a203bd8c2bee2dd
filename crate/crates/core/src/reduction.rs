//! Gauge fixing, Dirac brackets and elimination of second-class pairs.
//!
//! After gauge conditions turn the primary first-class constraints into
//! second-class pairs, those pairs are solved away. What survives is an
//! ordinary phase space with canonical brackets and the gauge-fixed
//! Hamiltonian. Ineffective secondary constraints are *not* eliminated: their
//! roots are carried along as conditions on the initial data.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraints::{
    self, classify, determine_multipliers, full_surface, gauge_records, rational_inverse, ClassifyOptions,
    ConstraintClass, ConstraintError, ConstraintRecord, DeterminedMultiplier, Origin, Surface, SurfaceElement,
    SystemDef,
};
use crate::symbolic::{PhaseExpr, PhaseSpace, SymbolicError, VarKind, Variable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("gauge incomplete: {0}")]
    GaugeIncomplete(String),
    #[error("unsupported elimination: {0}")]
    Unsupported(String),
    #[error("second-class constraint matrix is singular")]
    SingularConstraintMatrix,
    #[error("reduced bracket differs from the canonical one: {0}")]
    BracketMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketKind {
    Poisson,
    Dirac,
}

/// Poisson bracket, or the Dirac bracket of a set of second-class constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketStructure {
    pub kind: BracketKind,
    pub space: PhaseSpace,
    pub second_class: Vec<PhaseExpr>,
    /// Inverse of `C_ab = {χ_a, χ_b}`.
    pub c_matrix_inverse: Vec<Vec<PhaseExpr>>,
    /// Canonical pairs that survive elimination.
    pub reduced_pairs: Vec<(String, String)>,
}

impl BracketStructure {
    pub fn poisson(space: PhaseSpace) -> Self {
        let reduced_pairs = space.pairs();
        BracketStructure {
            kind: BracketKind::Poisson,
            space,
            second_class: Vec::new(),
            c_matrix_inverse: Vec::new(),
            reduced_pairs,
        }
    }

    /// Dirac bracket for `second_class`. Constant constraint matrices are
    /// inverted exactly; otherwise the cofactor inverse is used, which needs
    /// an invertible determinant inside the expression class.
    pub fn dirac(
        space: PhaseSpace,
        second_class: Vec<PhaseExpr>,
        surface: Option<&Surface>,
    ) -> Result<Self, ReductionError> {
        let n = second_class.len();
        let mut c = vec![vec![PhaseExpr::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                c[i][j] = space.poisson(&second_class[i], &second_class[j])?;
            }
        }
        let constant: Option<Vec<Vec<_>>> = c
            .iter()
            .map(|row| row.iter().map(PhaseExpr::as_constant).collect())
            .collect();
        let c_matrix_inverse = match constant {
            Some(m) => rational_inverse(&m)
                .ok_or(ReductionError::SingularConstraintMatrix)?
                .into_iter()
                .map(|row| row.into_iter().map(PhaseExpr::constant).collect())
                .collect(),
            None => {
                if let Some(s) = surface {
                    numeric_invertibility_check(&c, s)?;
                }
                cofactor_inverse(&c)?
            }
        };
        let reduced_pairs = space.pairs();
        Ok(BracketStructure {
            kind: BracketKind::Dirac,
            space,
            second_class,
            c_matrix_inverse,
            reduced_pairs,
        })
    }

    /// `{f, g}_D = {f, g} − {f, χ_a} (C⁻¹)^{ab} {χ_b, g}`.
    pub fn bracket(&self, f: &PhaseExpr, g: &PhaseExpr) -> Result<PhaseExpr, ReductionError> {
        let mut out = self.space.poisson(f, g)?;
        if self.kind == BracketKind::Poisson {
            return Ok(out);
        }
        let f_chi: Vec<PhaseExpr> = self
            .second_class
            .iter()
            .map(|chi| self.space.poisson(f, chi))
            .collect::<Result<_, _>>()?;
        let chi_g: Vec<PhaseExpr> = self
            .second_class
            .iter()
            .map(|chi| self.space.poisson(chi, g))
            .collect::<Result<_, _>>()?;
        for (a, fa) in f_chi.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (b, gb) in chi_g.iter().enumerate() {
                let cinv = &self.c_matrix_inverse[a][b];
                if gb.is_zero() || cinv.is_zero() {
                    continue;
                }
                out = out - &(fa * cinv) * gb;
            }
        }
        Ok(out)
    }
}

/// Dirac bracket of `f` and `g`.
pub fn dirac_bracket(bs: &BracketStructure, f: &PhaseExpr, g: &PhaseExpr) -> Result<PhaseExpr, ReductionError> {
    bs.bracket(f, g)
}

fn determinant(m: &[Vec<PhaseExpr>]) -> PhaseExpr {
    match m.len() {
        0 => PhaseExpr::one(),
        1 => m[0][0].clone(),
        n => (0..n).fold(PhaseExpr::zero(), |acc, j| {
            if m[0][j].is_zero() {
                return acc;
            }
            let minor = minor(m, 0, j);
            let term = &m[0][j] * &determinant(&minor);
            if j % 2 == 0 {
                acc + term
            } else {
                acc - term
            }
        }),
    }
}

fn minor(m: &[Vec<PhaseExpr>], row: usize, col: usize) -> Vec<Vec<PhaseExpr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn cofactor_inverse(m: &[Vec<PhaseExpr>]) -> Result<Vec<Vec<PhaseExpr>>, ReductionError> {
    let n = m.len();
    let det = determinant(m);
    if det.is_zero() {
        return Err(ReductionError::SingularConstraintMatrix);
    }
    let inv_det = det.inverse_unit().ok_or_else(|| {
        ReductionError::Unsupported(format!("determinant `{det}` of the constraint matrix is not invertible symbolically"))
    })?;
    let mut out = vec![vec![PhaseExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let cof = determinant(&minor(m, j, i));
            let signed = if (i + j) % 2 == 0 { cof } else { -cof };
            out[i][j] = &signed * &inv_det;
        }
    }
    Ok(out)
}

fn numeric_invertibility_check(c: &[Vec<PhaseExpr>], surface: &Surface) -> Result<(), ReductionError> {
    let n = c.len();
    let reduced: Vec<Vec<PhaseExpr>> = c
        .iter()
        .map(|row| row.iter().map(|e| surface.reduce(e)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let vars: BTreeSet<String> = reduced
        .iter()
        .flat_map(|row| row.iter().flat_map(|e| e.variables()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ac);
    for _ in 0..10 {
        let values: std::collections::BTreeMap<String, f64> =
            vars.iter().map(|v| (v.clone(), rng.gen_range(-1.0..1.0))).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = reduced[i][j].eval_with(|v| values.get(v).copied())?;
            }
        }
        let sv = m.singular_values();
        if sv.min() <= 1e-8 * sv.max() {
            return Err(ReductionError::SingularConstraintMatrix);
        }
    }
    Ok(())
}

/// Gauge-fixed system on the surviving canonical pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    /// Surviving variables with the gauge-fixed Hamiltonian as `h_canonical`.
    pub system: SystemDef,
    pub h_fixed: PhaseExpr,
    /// Solved second-class relations, in elimination order.
    pub eliminated: Vec<(String, PhaseExpr)>,
    /// Expressions required to vanish at `t = 0`.
    pub initial_conditions: Vec<PhaseExpr>,
    pub multipliers: Vec<DeterminedMultiplier>,
    /// Dirac bracket over the original phase space.
    pub bracket: BracketStructure,
    pub second_class: Vec<PhaseExpr>,
    /// A gauge function outside the linear class was used.
    pub gribov_risk: bool,
}

impl ReducedSystem {
    pub fn dimension(&self) -> usize {
        self.system.space.pairs().len()
    }

    /// Substitute the eliminated variables into `f`.
    pub fn restrict(&self, f: &PhaseExpr) -> Result<PhaseExpr, SymbolicError> {
        let mut out = f.clone();
        for _ in 0..=self.eliminated.len() {
            let mut changed = false;
            for (v, e) in &self.eliminated {
                if out.contains(v) {
                    out = out.substitute(v, e)?;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(out)
    }
}

fn dedup_push(list: &mut Vec<PhaseExpr>, e: PhaseExpr) {
    if e.is_zero() || list.iter().any(|x| e.rational_multiple_of(x).is_some()) {
        return;
    }
    list.push(e);
}

/// Eliminate the second-class pairs created by the gauge conditions.
///
/// `records` is the analyzed constraint chain (classes and effectiveness
/// marked without gauge conditions).
pub fn project(sys: &SystemDef, records: &[ConstraintRecord]) -> Result<ReducedSystem, ReductionError> {
    let mut all: Vec<ConstraintRecord> = records.iter().filter(|r| r.origin != Origin::Gauge).cloned().collect();
    all.extend(gauge_records(sys));
    let fixed = classify(&all, sys, ClassifyOptions::default())?;

    for r in fixed.records.iter().filter(|r| r.origin == Origin::Primary) {
        if r.class != ConstraintClass::Second {
            return Err(ReductionError::GaugeIncomplete(format!(
                "primary `{}` is still {:?} after gauge fixing",
                r.expr, r.class
            )));
        }
    }
    let second_class: Vec<PhaseExpr> = fixed
        .records
        .iter()
        .filter(|r| r.class == ConstraintClass::Second)
        .map(|r| r.expr.clone())
        .collect();
    // gauge conditions first so that C = [[0, 1], [-1, 0]] for a (χ, p) pair
    let mut ordered: Vec<PhaseExpr> = sys
        .gauge_conditions
        .iter()
        .filter(|g| second_class.contains(g))
        .cloned()
        .collect();
    ordered.extend(second_class.iter().filter(|c| !sys.gauge_conditions.contains(c)).cloned());

    let elimination = Surface::new(
        &sys.space,
        &ordered.iter().cloned().map(SurfaceElement::plain).collect::<Vec<_>>(),
    )
    .map_err(|e| match e {
        ConstraintError::IrreducibleConstraint(c) => {
            ReductionError::Unsupported(format!("second-class constraint `{c}` is not linear in any variable"))
        }
        other => other.into(),
    })?;
    let eliminated: Vec<(String, PhaseExpr)> = elimination
        .solved()
        .map(|(v, e)| (v.to_string(), e.clone()))
        .collect();
    let gone: BTreeSet<&str> = eliminated.iter().map(|(v, _)| v.as_str()).collect();
    let mut surviving = Vec::new();
    for (q, p) in sys.space.pairs() {
        match (gone.contains(q.as_str()), gone.contains(p.as_str())) {
            (false, false) => surviving.push((q, p)),
            (true, true) => {}
            _ => {
                return Err(ReductionError::Unsupported(format!(
                    "elimination removes only one of the pair ({q}, {p})"
                )))
            }
        }
    }
    let gribov_risk = eliminated
        .iter()
        .filter(|(v, _)| sys.space.get(v).is_some_and(|x| x.kind == VarKind::Coordinate))
        .any(|(_, e)| !e.is_affine());

    let multipliers = determine_multipliers(sys, records)?;
    let mut h = constraints::total_hamiltonian(sys);
    for m in &multipliers {
        h = h.substitute(&m.symbol, &m.raw)?;
    }
    let h_fixed = elimination.reduce(&h)?;
    if let Some(m) = sys.multipliers.iter().find(|m| h_fixed.contains(m)) {
        return Err(ReductionError::GaugeIncomplete(format!(
            "multiplier `{m}` survives in the gauge-fixed Hamiltonian"
        )));
    }

    let mut initial_conditions = Vec::new();
    for r in records.iter().filter(|r| r.generation > 0 && r.origin == Origin::Consistency) {
        let sources: Vec<PhaseExpr> = if r.roots_used.is_empty() {
            vec![r.expr.clone()]
        } else {
            r.roots_used.clone()
        };
        for s in sources {
            dedup_push(&mut initial_conditions, elimination.reduce(&s)?);
        }
    }

    let mut vars: Vec<Variable> = Vec::new();
    for (q, p) in &surviving {
        vars.push(sys.space.get(q).unwrap().clone());
        vars.push(sys.space.get(p).unwrap().clone());
    }
    let reduced_space = PhaseSpace::new(vars)?;
    let system = SystemDef::new(reduced_space.clone(), h_fixed.clone(), Vec::new(), Vec::new())?;

    let bracket = if ordered.is_empty() {
        BracketStructure::poisson(sys.space.clone())
    } else {
        let surface = full_surface(sys, &all)?;
        let mut b = BracketStructure::dirac(sys.space.clone(), ordered.clone(), Some(&surface))?;
        b.reduced_pairs = surviving.clone();
        b
    };

    let names = reduced_space.phase_variables();
    for u in &names {
        for w in &names {
            let d = bracket.bracket(&PhaseExpr::var(u), &PhaseExpr::var(w))?;
            let c = reduced_space.poisson(&PhaseExpr::var(u), &PhaseExpr::var(w))?;
            if elimination.reduce(&d)? != c {
                return Err(ReductionError::BracketMismatch(format!("{{{u}, {w}}}_D = {d}, expected {c}")));
            }
        }
    }

    Ok(ReducedSystem {
        system,
        h_fixed,
        eliminated,
        initial_conditions,
        multipliers,
        bracket,
        second_class: ordered,
        gribov_risk,
    })
}
