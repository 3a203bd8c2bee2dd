//! Dirac–Bergmann constraint analysis.
//!
//! Starting from a [`SystemDef`] (canonical Hamiltonian plus primary
//! constraints) the engine builds the total Hamiltonian, iterates brackets with
//! it to produce secondary, tertiary, … constraints, classifies them as first or
//! second class, tests which of them actually generate transformations, and
//! assembles the gauge generator chain.

mod legendre;
mod surface;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::symbolic::{PhaseExpr, PhaseSpace, Rational, SymbolicError, VarKind};

pub use legendre::{legendre, velocity_symbol, LagrangianDef};
pub(crate) use legendre::multiplier_names;
pub use surface::{reduce_mod_surface, Surface, SurfaceElement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("unsupported Lagrangian: {0}")]
    UnsupportedLagrangian(String),
    #[error("inconsistent momentum relation: {0}")]
    InconsistentMomenta(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("constraint `{0}` is neither linear in a variable nor accompanied by declared roots")]
    IrreducibleConstraint(String),
    #[error("constraint surface is empty: `{0}` reduces to a nonzero constant")]
    InconsistentSurface(String),
    #[error("constraint chain of branch {branch} (primary `{primary}`) did not close within {max_generation} generations")]
    NonTermination {
        branch: usize,
        primary: String,
        max_generation: usize,
    },
    #[error("root hint for `{0}` does not match any constraint produced by the chain")]
    UnusedRootHint(String),
    #[error("bracket matrix rank differs between surface samples ({0:?})")]
    InconsistentRank(Vec<usize>),
    #[error("gauge conditions are degenerate: {0}")]
    GaugeDegenerate(String),
}

/// Declared roots of a constraint that is not linear in any variable, e.g.
/// `1/2*z^2 -> z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootHint {
    pub constraint: PhaseExpr,
    pub roots: Vec<PhaseExpr>,
}

/// A constrained Hamiltonian system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    /// Coordinates, momenta and one parameter per multiplier.
    pub space: PhaseSpace,
    pub h_canonical: PhaseExpr,
    pub primaries: Vec<PhaseExpr>,
    pub multipliers: Vec<String>,
    pub gauge_conditions: Vec<PhaseExpr>,
    pub root_hints: Vec<RootHint>,
}

impl SystemDef {
    pub fn new(
        space: PhaseSpace,
        h_canonical: PhaseExpr,
        primaries: Vec<PhaseExpr>,
        multipliers: Vec<String>,
    ) -> Result<Self, ConstraintError> {
        if primaries.len() != multipliers.len() {
            return Err(ConstraintError::InvalidSystem(format!(
                "{} primaries but {} multipliers",
                primaries.len(),
                multipliers.len()
            )));
        }
        if let Some(p) = primaries.iter().find(|p| p.is_zero()) {
            return Err(ConstraintError::InvalidSystem(format!("primary constraint `{p}` is zero")));
        }
        let distinct: BTreeSet<&String> = multipliers.iter().collect();
        if distinct.len() != multipliers.len() {
            return Err(ConstraintError::InvalidSystem("multiplier symbols repeat".into()));
        }
        for m in &multipliers {
            match space.get(m) {
                Some(v) if v.kind == VarKind::Parameter => {}
                _ => {
                    return Err(ConstraintError::InvalidSystem(format!(
                        "multiplier `{m}` is not a declared parameter"
                    )))
                }
            }
            if h_canonical.contains(m) || primaries.iter().any(|p| p.contains(m)) {
                return Err(ConstraintError::InvalidSystem(format!(
                    "multiplier `{m}` appears in the canonical Hamiltonian or a primary"
                )));
            }
        }
        Ok(SystemDef {
            space,
            h_canonical,
            primaries,
            multipliers,
            gauge_conditions: Vec::new(),
            root_hints: Vec::new(),
        })
    }

    pub fn with_gauge(mut self, chi: PhaseExpr) -> Self {
        self.gauge_conditions.push(chi);
        self
    }

    pub fn with_roots(mut self, constraint: PhaseExpr, roots: Vec<PhaseExpr>) -> Self {
        self.root_hints.push(RootHint { constraint, roots });
        self
    }

    /// Roots declared for `c`, matched up to a nonzero rational factor.
    pub fn roots_for(&self, c: &PhaseExpr) -> Option<&[PhaseExpr]> {
        self.root_hints
            .iter()
            .find(|h| h.constraint.rational_multiple_of(c).is_some())
            .map(|h| h.roots.as_slice())
    }

    pub fn is_multiplier(&self, name: &str) -> bool {
        self.multipliers.iter().any(|m| m == name)
    }

    pub fn contains_multiplier(&self, f: &PhaseExpr) -> bool {
        self.multipliers.iter().any(|m| f.contains(m))
    }
}

/// `H_T = H_C + Σ μ_a φ_a`.
pub fn total_hamiltonian(sys: &SystemDef) -> PhaseExpr {
    sys.primaries
        .iter()
        .zip(&sys.multipliers)
        .fold(sys.h_canonical.clone(), |acc, (phi, mu)| acc + phi * &PhaseExpr::var(mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    First,
    Second,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Primary,
    Consistency,
    Gauge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRecord {
    pub expr: PhaseExpr,
    /// 0 for primaries and gauge conditions, n for the n-th bracket with H_T.
    pub generation: usize,
    /// Index of the primary constraint this record descends from.
    pub branch: usize,
    pub origin: Origin,
    pub class: ConstraintClass,
    pub effective: bool,
    pub roots_used: Vec<PhaseExpr>,
    /// `expr = sign · (reduced bracket)`; the bracket is oriented per [`BracketOrder`].
    pub sign: i8,
}

/// Orientation of the consistency bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BracketOrder {
    /// `{c, H_T}`: the time derivative of `c`.
    #[default]
    ConstraintFirst,
    /// `{H_T, c}`.
    HamiltonianFirst,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    pub max_generation: usize,
    pub order: BracketOrder,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            max_generation: 10,
            order: BracketOrder::ConstraintFirst,
        }
    }
}

/// Why a branch stopped producing constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Closure {
    /// The next bracket vanishes on the surface.
    Vanishes { branch: usize, generation: usize },
    /// The next bracket is a rational multiple of an existing constraint.
    Reproduces { branch: usize, generation: usize, of: usize },
    /// The next bracket involves multipliers: it fixes them rather than
    /// constraining phase space.
    FixesMultiplier {
        branch: usize,
        generation: usize,
        condition: PhaseExpr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub records: Vec<ConstraintRecord>,
    pub closures: Vec<Closure>,
}

fn sign_normalize(e: PhaseExpr) -> (PhaseExpr, i8) {
    match e.leading_coefficient() {
        Some(c) if c.is_negative() => (-e, -1),
        _ => (e, 1),
    }
}

fn oriented_bracket(
    space: &PhaseSpace,
    c: &PhaseExpr,
    h: &PhaseExpr,
    order: BracketOrder,
) -> Result<PhaseExpr, SymbolicError> {
    match order {
        BracketOrder::ConstraintFirst => space.poisson(c, h),
        BracketOrder::HamiltonianFirst => space.poisson(h, c),
    }
}

/// Surface elements used while the chain is still growing.
///
/// Root hints describe the final surface, so they only take part once every
/// hinted constraint has appeared; until then a nonlinear record carries strong
/// information only and is left out of the reduction.
fn growing_surface(
    sys: &SystemDef,
    records: &[ConstraintRecord],
) -> Result<Surface, ConstraintError> {
    let hints_active = sys
        .root_hints
        .iter()
        .all(|h| records.iter().any(|r| h.constraint.rational_multiple_of(&r.expr).is_some()));
    let mut elements = Vec::new();
    for r in records {
        match sys.roots_for(&r.expr) {
            Some(roots) if hints_active => {
                elements.push(SurfaceElement::rooted(r.expr.clone(), roots.to_vec()))
            }
            _ if is_solvable(&sys.space, &r.expr) => elements.push(SurfaceElement::plain(r.expr.clone())),
            _ => {}
        }
    }
    Surface::new(&sys.space, &elements)
}

fn is_solvable(space: &PhaseSpace, e: &PhaseExpr) -> bool {
    e.variables().iter().any(|v| {
        space.get(v).is_some_and(|var| var.kind != VarKind::Parameter) && e.linear_split(v).is_some()
    })
}

/// Iterate `c_(n) = {c_(n−1), H_T}` from every primary until each branch closes.
pub fn generate_chain(sys: &SystemDef, opts: ChainOptions) -> Result<Chain, ConstraintError> {
    let h_total = total_hamiltonian(sys);
    let mut records: Vec<ConstraintRecord> = Vec::new();
    for (i, p) in sys.primaries.iter().enumerate() {
        let (expr, sign) = sign_normalize(p.clone());
        records.push(ConstraintRecord {
            expr,
            generation: 0,
            branch: i,
            origin: Origin::Primary,
            class: ConstraintClass::Undetermined,
            effective: true,
            roots_used: Vec::new(),
            sign,
        });
    }
    let mut closures = Vec::new();
    let mut frontier: Vec<usize> = (0..records.len()).collect();
    let mut generation = 0;
    while !frontier.is_empty() {
        generation += 1;
        let mut next = Vec::new();
        for idx in frontier {
            let branch = records[idx].branch;
            if generation > opts.max_generation {
                return Err(ConstraintError::NonTermination {
                    branch,
                    primary: sys.primaries[branch].to_string(),
                    max_generation: opts.max_generation,
                });
            }
            let raw = oriented_bracket(&sys.space, &records[idx].expr, &h_total, opts.order)?;
            let surface = growing_surface(sys, &records)?;
            let reduced = surface.reduce(&raw)?;
            if reduced.is_zero() {
                closures.push(Closure::Vanishes { branch, generation });
                continue;
            }
            if sys.contains_multiplier(&reduced) {
                closures.push(Closure::FixesMultiplier {
                    branch,
                    generation,
                    condition: reduced,
                });
                continue;
            }
            if let Some(of) = records
                .iter()
                .position(|r| reduced.rational_multiple_of(&r.expr).is_some())
            {
                closures.push(Closure::Reproduces { branch, generation, of });
                continue;
            }
            let (expr, sign) = sign_normalize(reduced);
            records.push(ConstraintRecord {
                expr,
                generation,
                branch,
                origin: Origin::Consistency,
                class: ConstraintClass::Undetermined,
                effective: true,
                roots_used: Vec::new(),
                sign,
            });
            next.push(records.len() - 1);
        }
        frontier = next;
    }
    for h in &sys.root_hints {
        let matched = records
            .iter_mut()
            .filter(|r| h.constraint.rational_multiple_of(&r.expr).is_some())
            .map(|r| r.roots_used = h.roots.clone())
            .count();
        if matched == 0 {
            return Err(ConstraintError::UnusedRootHint(h.constraint.to_string()));
        }
    }
    Ok(Chain { records, closures })
}

/// Gauge conditions as records, so they can be classified alongside the chain.
pub fn gauge_records(sys: &SystemDef) -> Vec<ConstraintRecord> {
    sys.gauge_conditions
        .iter()
        .map(|chi| ConstraintRecord {
            expr: chi.clone(),
            generation: 0,
            branch: usize::MAX,
            origin: Origin::Gauge,
            class: ConstraintClass::Undetermined,
            effective: true,
            roots_used: Vec::new(),
            sign: 1,
        })
        .collect()
}

/// The full surface of `records`, using every declared root.
pub fn full_surface(sys: &SystemDef, records: &[ConstraintRecord]) -> Result<Surface, ConstraintError> {
    let elements: Vec<SurfaceElement> = records
        .iter()
        .map(|r| match sys.roots_for(&r.expr) {
            Some(roots) => SurfaceElement::rooted(r.expr.clone(), roots.to_vec()),
            None => SurfaceElement::plain(r.expr.clone()),
        })
        .collect();
    Surface::new(&sys.space, &elements)
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Relative threshold for numeric zero tests and rank decisions.
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tolerance: 1e-8,
            samples: 10,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub records: Vec<ConstraintRecord>,
    /// `{c_i, c_j}` reduced modulo the surface.
    pub bracket_matrix: Vec<Vec<PhaseExpr>>,
    /// True when the matrix had non-constant entries and was classified by sampling.
    pub sampled: bool,
}

impl Classification {
    pub fn second_class(&self) -> Vec<&ConstraintRecord> {
        self.records
            .iter()
            .filter(|r| r.class == ConstraintClass::Second)
            .collect()
    }
}

/// Exact rank of a rational matrix.
pub(crate) fn rational_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[rank][col];
                for c in col..cols {
                    let delta = &f * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Random point of the surface: every variable left after reduction gets a value in [-1, 1].
fn sample_values(vars: &BTreeSet<String>, rng: &mut ChaCha8Rng) -> std::collections::BTreeMap<String, f64> {
    vars.iter().map(|v| (v.clone(), rng.gen_range(-1.0..1.0))).collect()
}

/// Classify constraints as first or second class from their on-surface brackets.
pub fn classify(
    records: &[ConstraintRecord],
    sys: &SystemDef,
    opts: ClassifyOptions,
) -> Result<Classification, ConstraintError> {
    let surface = full_surface(sys, records)?;
    let n = records.len();
    let mut matrix = vec![vec![PhaseExpr::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b = surface.reduce(&sys.space.poisson(&records[i].expr, &records[j].expr)?)?;
            matrix[j][i] = -&b;
            matrix[i][j] = b;
        }
    }
    let mut out = records.to_vec();
    let constant: Option<Vec<Vec<Rational>>> = matrix
        .iter()
        .map(|row| row.iter().map(|e| e.as_constant()).collect())
        .collect();
    let sampled = constant.is_none();
    let classes = match constant {
        Some(m) => {
            let nonzero: Vec<usize> = (0..n).filter(|&i| m[i].iter().any(|c| !c.is_zero())).collect();
            let sub: Vec<Vec<Rational>> = nonzero
                .iter()
                .map(|&i| nonzero.iter().map(|&j| m[i][j].clone()).collect())
                .collect();
            let full = rational_rank(sub) == nonzero.len();
            (0..n)
                .map(|i| classify_row(nonzero.contains(&i), full))
                .collect::<Vec<_>>()
        }
        None => classify_sampled(&matrix, opts)?,
    };
    for (r, c) in out.iter_mut().zip(classes) {
        r.class = c;
    }
    Ok(Classification {
        records: out,
        bracket_matrix: matrix,
        sampled,
    })
}

fn classify_row(nonzero: bool, full_rank: bool) -> ConstraintClass {
    match (nonzero, full_rank) {
        (false, _) => ConstraintClass::First,
        (true, true) => ConstraintClass::Second,
        (true, false) => ConstraintClass::Undetermined,
    }
}

fn classify_sampled(
    matrix: &[Vec<PhaseExpr>],
    opts: ClassifyOptions,
) -> Result<Vec<ConstraintClass>, ConstraintError> {
    let n = matrix.len();
    let vars: BTreeSet<String> = matrix
        .iter()
        .flat_map(|row| row.iter().flat_map(|e| e.variables()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ranks = Vec::new();
    let mut verdict: Option<Vec<ConstraintClass>> = None;
    for _ in 0..opts.samples {
        let values = sample_values(&vars, &mut rng);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = matrix[i][j].eval_with(|v| values.get(v).copied())?;
            }
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let nonzero: Vec<usize> = (0..n)
            .filter(|&i| m.row(i).amax() > opts.tolerance * scale)
            .collect();
        let sub = DMatrix::from_fn(nonzero.len(), nonzero.len(), |a, b| m[(nonzero[a], nonzero[b])]);
        let rank = if nonzero.is_empty() {
            0
        } else {
            let sv = sub.singular_values();
            let top = sv.max();
            sv.iter().filter(|&&s| s > opts.tolerance * top).count()
        };
        ranks.push(rank);
        let classes: Vec<ConstraintClass> = (0..n)
            .map(|i| classify_row(nonzero.contains(&i), rank == nonzero.len()))
            .collect();
        match &verdict {
            None => verdict = Some(classes),
            Some(prev) if *prev != classes => return Err(ConstraintError::InconsistentRank(ranks)),
            _ => {}
        }
    }
    Ok(verdict.unwrap_or_else(|| vec![ConstraintClass::First; n]))
}

/// True when some gradient component of `rec` survives on the surface.
pub fn effectiveness(
    rec: &ConstraintRecord,
    space: &PhaseSpace,
    surface: &Surface,
) -> Result<bool, ConstraintError> {
    for v in space.phase_variables() {
        let g = rec.expr.diff(&v);
        if !surface.reduce(&g)?.is_zero() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Mark every record effective or ineffective against the full surface.
pub fn mark_effectiveness(
    records: &mut [ConstraintRecord],
    sys: &SystemDef,
) -> Result<(), ConstraintError> {
    let surface = full_surface(sys, records)?;
    for i in 0..records.len() {
        records[i].effective = effectiveness(&records[i], &sys.space, &surface)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeLink {
    #[serde(serialize_with = "crate::report::expr_text")]
    pub expr: PhaseExpr,
    pub generation: usize,
    /// Gauge parameter this link belongs to (one per primary branch).
    pub parameter: String,
    /// Order of the time derivative of the parameter multiplying this link.
    pub derivative_order: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GaugeGenerator {
    pub links: Vec<GaugeLink>,
}

impl GaugeGenerator {
    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn to_text(&self) -> String {
        if self.links.is_empty() {
            return "0".into();
        }
        self.links
            .iter()
            .map(|l| {
                let eps = match l.derivative_order {
                    0 => l.parameter.clone(),
                    k => format!("d^{k}{}/dt^{k}", l.parameter),
                };
                format!("{eps}*({})", l.expr)
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Gauge generator `G = Σ_n ε^{(k−n)} G_n` from effective first-class records.
///
/// Each branch contributes its records in generation order until the first
/// record that is second class or ineffective.
pub fn castellani(records: &[ConstraintRecord]) -> GaugeGenerator {
    let branches: BTreeSet<usize> = records
        .iter()
        .filter(|r| r.origin == Origin::Primary)
        .map(|r| r.branch)
        .collect();
    let named = branches.len() > 1;
    let mut links = Vec::new();
    for (ordinal, b) in branches.iter().enumerate() {
        let mut chain: Vec<&ConstraintRecord> = records
            .iter()
            .filter(|r| r.branch == *b && r.origin != Origin::Gauge)
            .collect();
        chain.sort_by_key(|r| r.generation);
        let kept: Vec<&ConstraintRecord> = chain
            .into_iter()
            .take_while(|r| r.class == ConstraintClass::First && r.effective)
            .collect();
        let k = kept.len().saturating_sub(1);
        let parameter = if named {
            format!("eps{}", ordinal + 1)
        } else {
            "eps".to_string()
        };
        for (n, r) in kept.iter().enumerate() {
            links.push(GaugeLink {
                expr: r.expr.clone(),
                generation: r.generation,
                parameter: parameter.clone(),
                derivative_order: k - n,
            });
        }
    }
    GaugeGenerator { links }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminedMultiplier {
    pub symbol: String,
    /// Solution of `{χ, H_T} = 0` before restriction to the surface.
    #[serde(serialize_with = "crate::report::expr_text")]
    pub raw: PhaseExpr,
    #[serde(serialize_with = "crate::report::expr_text")]
    pub on_surface: PhaseExpr,
}

/// Solve the gauge-preservation conditions `{χ, H_T} ≈ 0` for the multipliers.
pub fn determine_multipliers(
    sys: &SystemDef,
    records: &[ConstraintRecord],
) -> Result<Vec<DeterminedMultiplier>, ConstraintError> {
    if sys.gauge_conditions.is_empty() {
        return Ok(Vec::new());
    }
    let mut all = records.to_vec();
    all.extend(gauge_records(sys));
    let surface = full_surface(sys, &all)?;
    let g = sys.gauge_conditions.len();
    let mut a: Vec<Vec<PhaseExpr>> = Vec::with_capacity(g);
    let mut b: Vec<PhaseExpr> = Vec::with_capacity(g);
    for chi in &sys.gauge_conditions {
        let row = sys
            .primaries
            .iter()
            .map(|phi| surface.reduce(&sys.space.poisson(chi, phi)?))
            .collect::<Result<Vec<_>, ConstraintError>>()?;
        a.push(row);
        b.push(-sys.space.poisson(chi, &sys.h_canonical)?);
    }
    let cols: Vec<usize> = (0..sys.primaries.len())
        .filter(|&j| a.iter().any(|row| !row[j].is_zero()))
        .collect();
    if cols.len() != g {
        return Err(ConstraintError::GaugeDegenerate(format!(
            "{g} gauge conditions act on {} multipliers",
            cols.len()
        )));
    }
    let solution = solve_linear(&a, &cols, &b)?;
    cols.iter()
        .zip(solution)
        .map(|(&j, raw)| {
            Ok(DeterminedMultiplier {
                symbol: sys.multipliers[j].clone(),
                on_surface: surface.reduce(&raw)?,
                raw,
            })
        })
        .collect()
}

/// Solve `A[:, cols] x = b` where the selected block is constant, or a single unit.
fn solve_linear(
    a: &[Vec<PhaseExpr>],
    cols: &[usize],
    b: &[PhaseExpr],
) -> Result<Vec<PhaseExpr>, ConstraintError> {
    let n = cols.len();
    if n == 1 {
        if let Some(inv) = a[0][cols[0]].inverse_unit() {
            return Ok(vec![&inv * &b[0]]);
        }
    }
    let mut m: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for row in a {
        let r = cols
            .iter()
            .map(|&j| row[j].as_constant())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                ConstraintError::Symbolic(SymbolicError::Unsupported(
                    "gauge-condition brackets with primaries are not constant on the surface".into(),
                ))
            })?;
        m.push(r);
    }
    let inv = rational_inverse(&m).ok_or_else(|| {
        ConstraintError::GaugeDegenerate("bracket matrix of gauge conditions with primaries is singular".into())
    })?;
    Ok((0..n)
        .map(|i| {
            (0..n).fold(PhaseExpr::zero(), |acc, j| acc + b[j].scale(&inv[i][j]))
        })
        .collect())
}

/// Gauss–Jordan inverse of a square rational matrix.
pub(crate) fn rational_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::from_integer(1.into()) } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for c in 0..2 * n {
            aug[col][c] = &aug[col][c] / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in 0..2 * n {
                    let delta = &f * &aug[col][c];
                    aug[r][c] -= delta;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}
