//! Classical flows of total, gauge-fixed and extended Hamiltonians.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraints::{ConstraintClass, ConstraintRecord, Origin, SystemDef};
use crate::reduction::{BracketStructure, ReductionError};
use crate::symbolic::{rational_to_f64, PhaseExpr, PhasePoint, PhaseSpace, SymbolicError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("trajectory aborted: non-finite state after step {last_valid} (t = {time})")]
    AbortedTrajectory { last_valid: usize, time: f64 },
    #[error("no multiplier policy for `{0}`")]
    NoPolicy(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("at least two policies are needed, got {0}")]
    TooFewPolicies(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    Total,
    Fixed,
    Extended,
}

impl std::str::FromStr for HamiltonianKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "total" => Ok(HamiltonianKind::Total),
            "fixed" => Ok(HamiltonianKind::Fixed),
            "extended" => Ok(HamiltonianKind::Extended),
            other => Err(format!("unknown hamiltonian kind `{other}` (total, fixed, extended)")),
        }
    }
}

/// `v̇ = {v, h}` for every phase variable of the bracket's space.
pub fn field_equations(h: &PhaseExpr, bracket: &BracketStructure) -> Result<Vec<(String, PhaseExpr)>, ReductionError> {
    bracket
        .space
        .phase_variables()
        .into_iter()
        .map(|v| {
            let rhs = bracket.bracket(&PhaseExpr::var(&v), h)?;
            Ok((v, rhs))
        })
        .collect()
}

/// Extended Hamiltonian with the space that declares its new multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedHamiltonian {
    pub h: PhaseExpr,
    pub space: PhaseSpace,
    /// `(symbol, constraint)` in the order the terms were added.
    pub added: Vec<(String, PhaseExpr)>,
}

/// `H_E = H_T + Σ λ_k c_k` over the first-class secondary constraints, each
/// replaced by its declared roots when it has any. New terms are ordered by
/// printed form, and named `lambda` or `lambda1`, `lambda2`, ….
pub fn extended_hamiltonian(
    sys: &SystemDef,
    records: &[ConstraintRecord],
) -> Result<ExtendedHamiltonian, SymbolicError> {
    let mut extra: Vec<PhaseExpr> = Vec::new();
    for r in records
        .iter()
        .filter(|r| r.origin == Origin::Consistency && r.class == ConstraintClass::First)
    {
        let sources = if r.roots_used.is_empty() {
            vec![r.expr.clone()]
        } else {
            r.roots_used.clone()
        };
        for s in sources {
            if !extra.iter().any(|e| s.rational_multiple_of(e).is_some()) {
                extra.push(s);
            }
        }
    }
    extra.sort_by_cached_key(|e| e.to_string());
    let names: Vec<String> = match extra.len() {
        1 => vec!["lambda".to_string()],
        n => (1..=n).map(|i| format!("lambda{i}")).collect(),
    };
    let mut h = crate::constraints::total_hamiltonian(sys);
    let mut space = sys.space.clone();
    let mut added = Vec::new();
    for (name, c) in names.into_iter().zip(extra) {
        space = space.with_parameter(&name)?;
        h = h + PhaseExpr::var(&name) * c.clone();
        added.push((name, c));
    }
    Ok(ExtendedHamiltonian { h, space, added })
}

/// A phase-space function compiled for repeated floating-point evaluation.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coefficient: f64,
    powers: Vec<(usize, i32)>,
    exp_constant: f64,
    exp_linear: Vec<(usize, f64)>,
}

impl CompiledExpr {
    /// Compile `e` against a slot layout; every variable of `e` needs a slot.
    pub fn new(e: &PhaseExpr, slots: &BTreeMap<String, usize>) -> Result<Self, SymbolicError> {
        let slot = |v: &str| slots.get(v).copied().ok_or_else(|| SymbolicError::MissingValue(v.to_string()));
        let mut terms = Vec::with_capacity(e.term_count());
        for (key, c) in e.terms() {
            terms.push(CompiledTerm {
                coefficient: rational_to_f64(c),
                powers: key
                    .monomial
                    .iter()
                    .map(|(v, k)| Ok((slot(v)?, k as i32)))
                    .collect::<Result<_, SymbolicError>>()?,
                exp_constant: rational_to_f64(key.exp.constant()),
                exp_linear: key
                    .exp
                    .iter()
                    .map(|(v, r)| Ok((slot(v)?, rational_to_f64(r))))
                    .collect::<Result<_, SymbolicError>>()?,
            });
        }
        Ok(CompiledExpr { terms })
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = t.coefficient;
            for &(i, k) in &t.powers {
                v *= values[i].powi(k);
            }
            if !t.exp_linear.is_empty() || t.exp_constant != 0.0 {
                let arg = t.exp_linear.iter().fold(t.exp_constant, |a, &(i, r)| a + r * values[i]);
                v *= arg.exp();
            }
            total += v;
        }
        total
    }
}

const RANDOM_MODES: usize = 8;

/// Time dependence of a single multiplier.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MultiplierFn {
    Zero,
    Constant { value: f64 },
    /// Samples at `t0 + i·dt`, linearly interpolated and held constant outside.
    Tabulated { t0: f64, dt: f64, values: Vec<f64> },
    /// Seeded sum of 8 Fourier modes with frequencies up to `cutoff`.
    Random { seed: u64, amplitude: f64, cutoff: f64 },
}

impl MultiplierFn {
    pub fn random(seed: u64, amplitude: f64, cutoff: f64) -> Self {
        MultiplierFn::Random { seed, amplitude, cutoff }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            MultiplierFn::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Multiplier functions by symbol, with an optional fallback.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MultiplierPolicy {
    pub per_symbol: BTreeMap<String, MultiplierFn>,
    pub default: Option<MultiplierFn>,
}

impl MultiplierPolicy {
    pub fn zero() -> Self {
        Self::uniform(MultiplierFn::Zero)
    }

    pub fn uniform(f: MultiplierFn) -> Self {
        MultiplierPolicy { per_symbol: BTreeMap::new(), default: Some(f) }
    }

    pub fn with(mut self, symbol: &str, f: MultiplierFn) -> Self {
        self.per_symbol.insert(symbol.to_string(), f);
        self
    }

    pub fn get(&self, symbol: &str) -> Option<&MultiplierFn> {
        self.per_symbol.get(symbol).or(self.default.as_ref())
    }

    /// First random seed in use, if any.
    pub fn seed(&self) -> Option<u64> {
        self.per_symbol
            .values()
            .chain(self.default.iter())
            .find_map(MultiplierFn::seed)
    }
}

fn symbol_hash(s: &str) -> u64 {
    // FNV-1a, so per-symbol random streams are stable across platforms
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

enum ResolvedFn {
    Constant(f64),
    Tabulated { t0: f64, dt: f64, values: Vec<f64> },
    Fourier { modes: Vec<(f64, f64, f64)>, scale: f64 },
}

impl ResolvedFn {
    fn new(f: &MultiplierFn, symbol: &str) -> Self {
        match f {
            MultiplierFn::Zero => ResolvedFn::Constant(0.0),
            MultiplierFn::Constant { value } => ResolvedFn::Constant(*value),
            MultiplierFn::Tabulated { t0, dt, values } => ResolvedFn::Tabulated {
                t0: *t0,
                dt: *dt,
                values: values.clone(),
            },
            MultiplierFn::Random { seed, amplitude, cutoff } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ symbol_hash(symbol));
                let modes = (1..=RANDOM_MODES)
                    .map(|k| {
                        let omega = cutoff * k as f64 / RANDOM_MODES as f64;
                        (omega, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                ResolvedFn::Fourier {
                    modes,
                    scale: amplitude / (RANDOM_MODES as f64).sqrt(),
                }
            }
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match self {
            ResolvedFn::Constant(v) => *v,
            ResolvedFn::Tabulated { t0, dt, values } => {
                if values.is_empty() {
                    return 0.0;
                }
                let s = (t - t0) / dt;
                if s <= 0.0 {
                    return values[0];
                }
                let i = s.floor() as usize;
                if i + 1 >= values.len() {
                    return *values.last().unwrap();
                }
                let f = s - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
            ResolvedFn::Fourier { modes, scale } => {
                scale * modes.iter().map(|(w, a, b)| a * (w * t).cos() + b * (w * t).sin()).sum::<f64>()
            }
        }
    }
}

/// Uniform time grid `t0 + i·h`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub h: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, h: f64, steps: usize) -> Self {
        TimeGrid { t0, h, steps }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }
}

/// Compiled field equations ready for integration.
#[derive(Debug, Clone)]
pub struct Flow {
    pub kind: HamiltonianKind,
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub equations: Vec<(String, PhaseExpr)>,
    /// Checked against the initial point; violations become warnings.
    pub initial_conditions: Vec<PhaseExpr>,
    rhs: Vec<CompiledExpr>,
}

impl Flow {
    pub fn new(h: &PhaseExpr, bracket: &BracketStructure, kind: HamiltonianKind) -> Result<Self, DynamicsError> {
        let equations = field_equations(h, bracket)?;
        let variables = bracket.space.phase_variables();
        let parameters: Vec<String> = h
            .variables()
            .into_iter()
            .filter(|v| !variables.contains(v))
            .collect();
        let mut slots = BTreeMap::new();
        for (i, v) in variables.iter().chain(&parameters).enumerate() {
            slots.insert(v.clone(), i);
        }
        let rhs = equations
            .iter()
            .map(|(_, e)| CompiledExpr::new(e, &slots))
            .collect::<Result<_, _>>()?;
        Ok(Flow {
            kind,
            variables,
            parameters,
            equations,
            initial_conditions: Vec::new(),
            rhs,
        })
    }

    pub fn with_initial_conditions(mut self, conditions: Vec<PhaseExpr>) -> Self {
        self.initial_conditions = conditions;
        self
    }
}

/// Sampled classical path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub variables: Vec<String>,
    pub grid: TimeGrid,
    pub states: Vec<Vec<f64>>,
    pub hamiltonian_kind: HamiltonianKind,
    pub policy_seed: Option<u64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(|i| self.grid.time(i))
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        self.variables
            .iter()
            .zip(&self.states[i])
            .map(|(v, x)| (v.as_str(), *x))
            .collect()
    }

    pub fn series(&self, var: &str) -> Option<Vec<f64>> {
        let k = self.variables.iter().position(|v| v == var)?;
        Some(self.states.iter().map(|s| s[k]).collect())
    }

    /// Values of `f` along the trajectory.
    pub fn evaluate(&self, f: &PhaseExpr) -> Result<Vec<f64>, SymbolicError> {
        let slots: BTreeMap<String, usize> =
            self.variables.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let c = CompiledExpr::new(f, &slots)?;
        Ok(self.states.iter().map(|s| c.eval(s)).collect())
    }

    /// `t,<vars>` table with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for v in &self.variables {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (i, s) in self.states.iter().enumerate() {
            let _ = write!(out, "{:.16e}", self.grid.time(i));
            for x in s {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-step classical Runge–Kutta integration of a flow.
pub fn integrate(
    flow: &Flow,
    init: &PhasePoint,
    policy: &MultiplierPolicy,
    grid: TimeGrid,
) -> Result<Trajectory, DynamicsError> {
    if !(grid.h > 0.0 && grid.h.is_finite()) {
        return Err(DynamicsError::InvalidGrid(format!("step {} must be positive", grid.h)));
    }
    let n = flow.variables.len();
    let mut y: Vec<f64> = flow
        .variables
        .iter()
        .map(|v| init.get(v).ok_or_else(|| SymbolicError::MissingValue(v.clone())))
        .collect::<Result<_, _>>()?;
    let multipliers: Vec<ResolvedFn> = flow
        .parameters
        .iter()
        .map(|p| {
            policy
                .get(p)
                .map(|f| ResolvedFn::new(f, p))
                .ok_or_else(|| DynamicsError::NoPolicy(p.clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut warnings = Vec::new();
    for c in &flow.initial_conditions {
        let v = c.evaluate(init)?;
        if v.abs() > 1e-12 {
            warnings.push(format!("initial condition {c} = 0 violated: value {v:e}"));
        }
    }

    let mut buf = vec![0.0; n + multipliers.len()];
    let mut deriv = |state: &[f64], t: f64, out: &mut [f64]| {
        buf[..n].copy_from_slice(state);
        for (i, m) in multipliers.iter().enumerate() {
            buf[n + i] = m.eval(t);
        }
        for (o, r) in out.iter_mut().zip(&flow.rhs) {
            *o = r.eval(&buf);
        }
    };

    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(y.clone());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let h = grid.h;
    for i in 0..grid.steps {
        let t = grid.time(i);
        deriv(&y, t, &mut k1);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        deriv(&tmp, t + 0.5 * h, &mut k2);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        deriv(&tmp, t + 0.5 * h, &mut k3);
        for j in 0..n {
            tmp[j] = y[j] + h * k3[j];
        }
        deriv(&tmp, t + h, &mut k4);
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::AbortedTrajectory { last_valid: i, time: t });
        }
        states.push(y.clone());
    }
    Ok(Trajectory {
        variables: flow.variables.clone(),
        grid,
        states,
        hamiltonian_kind: flow.kind,
        policy_seed: policy.seed(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drift {
    #[serde(serialize_with = "crate::report::expr_text")]
    pub constraint: PhaseExpr,
    pub max_abs: f64,
    pub at_time: f64,
}

/// Largest `|c|` over the samples for each constraint.
pub fn constraint_drift(traj: &Trajectory, constraints: &[PhaseExpr]) -> Result<Vec<Drift>, SymbolicError> {
    constraints
        .iter()
        .map(|c| {
            let values = traj.evaluate(c)?;
            let (i, m) = values
                .iter()
                .map(|v| v.abs())
                .enumerate()
                .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
            Ok(Drift {
                constraint: c.clone(),
                max_abs: m,
                at_time: traj.grid.time(i),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    #[serde(serialize_with = "crate::report::expr_text")]
    pub observable: PhaseExpr,
    /// `max_t (max − min)` across policies.
    pub max_spread: f64,
    pub at_time: f64,
    pub final_values: Vec<f64>,
}

/// Integrate once per policy and measure how far the observable spreads.
pub fn gauge_dependence(
    flow: &Flow,
    observable: &PhaseExpr,
    policies: &[MultiplierPolicy],
    init: &PhasePoint,
    grid: TimeGrid,
) -> Result<SpreadReport, DynamicsError> {
    if policies.len() < 2 {
        return Err(DynamicsError::TooFewPolicies(policies.len()));
    }
    let series: Vec<Vec<f64>> = policies
        .iter()
        .map(|p| Ok(integrate(flow, init, p, grid)?.evaluate(observable)?))
        .collect::<Result<_, DynamicsError>>()?;
    let mut best = (0.0, 0);
    for i in 0..=grid.steps {
        let (lo, hi) = series
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[i]), hi.max(s[i])));
        if hi - lo > best.0 {
            best = (hi - lo, i);
        }
    }
    Ok(SpreadReport {
        observable: observable.clone(),
        max_spread: best.0,
        at_time: grid.time(best.1),
        final_values: series.iter().map(|s| s[grid.steps]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{
        classify, generate_chain, legendre, mark_effectiveness, ChainOptions, ClassifyOptions, LagrangianDef,
    };
    use crate::reduction::project;
    use crate::symbolic::parse_expr;

    fn e(s: &str) -> PhaseExpr {
        parse_expr(s).unwrap()
    }

    fn analyzed(sys: &SystemDef) -> Vec<ConstraintRecord> {
        let chain = generate_chain(sys, ChainOptions::default()).unwrap();
        let mut recs = classify(&chain.records, sys, ClassifyOptions::default()).unwrap().records;
        mark_effectiveness(&mut recs, sys).unwrap();
        recs
    }

    fn system_a() -> SystemDef {
        legendre(&LagrangianDef::new(&["x", "y"], e("1/2*exp(y)*x_dot^2")))
            .unwrap()
            .with_roots(e("1/2*exp(-y)*p_x^2"), vec![e("p_x")])
    }

    fn cawley() -> SystemDef {
        legendre(&LagrangianDef::new(&["x", "y", "z"], e("x_dot*z_dot + 1/2*y*z^2")))
            .unwrap()
            .with_roots(e("1/2*z^2"), vec![e("z")])
            .with_roots(e("z*p_x"), vec![e("p_x")])
    }

    fn oscillator() -> (PhaseExpr, BracketStructure) {
        (e("1/2*p_x^2 + 1/2*x^2"), BracketStructure::poisson(PhaseSpace::canonical(&["x"])))
    }

    #[test]
    fn field_equations_of_the_examples() {
        let sys = system_a();
        let ht = crate::constraints::total_hamiltonian(&sys);
        let eqs = field_equations(&ht, &BracketStructure::poisson(sys.space.clone())).unwrap();
        let want = [("x", "exp(-y)*p_x"), ("y", "mu"), ("p_x", "0"), ("p_y", "1/2*exp(-y)*p_x^2")];
        for (v, rhs) in want {
            assert_eq!(eqs.iter().find(|(n, _)| n == v).unwrap().1, e(rhs), "{v}");
        }
        let sys = cawley();
        let ht = crate::constraints::total_hamiltonian(&sys);
        let eqs = field_equations(&ht, &BracketStructure::poisson(sys.space.clone())).unwrap();
        let want = [
            ("x", "p_z"),
            ("y", "mu"),
            ("z", "p_x"),
            ("p_x", "0"),
            ("p_y", "1/2*z^2"),
            ("p_z", "y*z"),
        ];
        for (v, rhs) in want {
            assert_eq!(eqs.iter().find(|(n, _)| n == v).unwrap().1, e(rhs), "{v}");
        }
        let (h, b) = oscillator();
        assert_eq!(field_equations(&h, &b).unwrap(), vec![("x".into(), e("p_x")), ("p_x".into(), e("-x"))]);
    }

    #[test]
    fn extended_hamiltonians() {
        let sys = system_a();
        let ext = extended_hamiltonian(&sys, &analyzed(&sys)).unwrap();
        assert_eq!(ext.h, e("1/2*exp(-y)*p_x^2 + mu*p_y + lambda*p_x"));
        let sys = cawley();
        let ext = extended_hamiltonian(&sys, &analyzed(&sys)).unwrap();
        assert_eq!(ext.h, e("p_x*p_z - 1/2*y*z^2 + mu*p_y + lambda1*p_x + lambda2*z"));
        assert!(ext.space.contains("lambda2"));
        let osc = legendre(&LagrangianDef::new(&["x"], e("1/2*x_dot^2 - 1/2*x^2"))).unwrap();
        assert_eq!(extended_hamiltonian(&osc, &[]).unwrap().h, osc.h_canonical);
    }

    #[test]
    fn gauge_fixed_flows() {
        let sys = system_a().with_gauge(e("y - x"));
        let red = project(&sys, &analyzed(&sys)).unwrap();
        let b = BracketStructure::poisson(red.system.space.clone());
        let flow = Flow::new(&red.h_fixed, &b, HamiltonianKind::Fixed).unwrap();
        let init = PhasePoint::new().with("x", 1.0).with("p_x", 0.0);
        let traj = integrate(&flow, &init, &MultiplierPolicy::zero(), TimeGrid::new(0.0, 1e-3, 10_000)).unwrap();
        assert!(traj.series("x").unwrap().iter().all(|x| (x - 1.0).abs() < 1e-10));

        let sys = cawley().with_gauge(e("y - 2*x + p_z"));
        let red = project(&sys, &analyzed(&sys)).unwrap();
        let b = BracketStructure::poisson(red.system.space.clone());
        let flow = Flow::new(&red.h_fixed, &b, HamiltonianKind::Fixed).unwrap();
        let init = PhasePoint::new().with("x", 0.0).with("p_x", 0.0).with("z", 0.0).with("p_z", 2.0);
        let traj = integrate(&flow, &init, &MultiplierPolicy::zero(), TimeGrid::new(0.0, 1e-3, 10_000)).unwrap();
        let last = traj.point(10_000);
        assert!((last.get("x").unwrap() - 20.0).abs() < 1e-8);
        assert_eq!(last.get("z"), Some(0.0));
        assert_eq!(last.get("p_x"), Some(0.0));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let (h, b) = oscillator();
        let flow = Flow::new(&h, &b, HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 1.0).with("p_x", 0.0);
        let err = |steps: usize| {
            let t = integrate(&flow, &init, &MultiplierPolicy::zero(), TimeGrid::new(0.0, 1.0 / steps as f64, steps))
                .unwrap();
            (t.series("x").unwrap()[steps] - 1f64.cos()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn energy_is_conserved() {
        let (h, b) = oscillator();
        let flow = Flow::new(&h, &b, HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 0.3).with("p_x", -1.1);
        let t = integrate(&flow, &init, &MultiplierPolicy::zero(), TimeGrid::new(0.0, 1e-3, 10_000)).unwrap();
        let en = t.evaluate(&h).unwrap();
        assert!(en.iter().all(|v| (v - en[0]).abs() < 1e-8));
    }

    #[test]
    fn physical_and_gauge_observables() {
        let sys = system_a();
        let recs = analyzed(&sys);
        let ht = crate::constraints::total_hamiltonian(&sys);
        let flow = Flow::new(&ht, &BracketStructure::poisson(sys.space.clone()), HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 1.0).with("y", 0.0).with("p_x", 0.0).with("p_y", 0.0);
        let grid = TimeGrid::new(0.0, 1e-2, 1000);
        let policies = [MultiplierPolicy::zero(), MultiplierPolicy::uniform(MultiplierFn::random(1, 1.0, 2.0))];
        assert!(gauge_dependence(&flow, &e("x"), &policies, &init, grid).unwrap().max_spread < 1e-10);
        assert!(gauge_dependence(&flow, &e("y"), &policies, &init, grid).unwrap().max_spread > 0.1);

        let ext = extended_hamiltonian(&sys, &recs).unwrap();
        let flow = Flow::new(&ext.h, &BracketStructure::poisson(ext.space.clone()), HamiltonianKind::Extended).unwrap();
        assert!(gauge_dependence(&flow, &e("x"), &policies, &init, grid).unwrap().max_spread > 0.1);
        assert!(matches!(
            gauge_dependence(&flow, &e("x"), &policies[..1], &init, grid),
            Err(DynamicsError::TooFewPolicies(1))
        ));
    }

    #[test]
    fn drift_of_cawley_constraints() {
        let sys = cawley();
        let ht = crate::constraints::total_hamiltonian(&sys);
        let flow = Flow::new(&ht, &BracketStructure::poisson(sys.space.clone()), HamiltonianKind::Total)
            .unwrap()
            .with_initial_conditions(vec![e("z"), e("p_x")]);
        let policy = MultiplierPolicy::uniform(MultiplierFn::random(7, 1.0, 2.0));
        let grid = TimeGrid::new(0.0, 1e-2, 1000);
        let cs = [e("1/2*z^2"), e("z*p_x")];
        let mut init = PhasePoint::new().with("x", 0.5).with("y", 1.0).with("z", 0.0);
        init.set("p_x", 0.0);
        init.set("p_y", 0.0);
        init.set("p_z", 1.0);
        let t = integrate(&flow, &init, &policy, grid).unwrap();
        assert!(t.warnings.is_empty());
        assert!(constraint_drift(&t, &cs).unwrap().iter().all(|d| d.max_abs <= 1e-12));

        init.set("z", 0.1);
        let t = integrate(&flow, &init, &policy, grid).unwrap();
        assert_eq!(t.warnings.len(), 1);
        let d = constraint_drift(&t, &cs[..1]).unwrap();
        assert!(d[0].max_abs >= 5e-3);
        assert_eq!(t.evaluate(&cs[0]).unwrap()[0], 0.5 * 0.1 * 0.1);
        assert!(constraint_drift(&t, &[]).unwrap().is_empty());
    }

    #[test]
    fn free_particle_is_exact_and_deterministic() {
        let b = BracketStructure::poisson(PhaseSpace::canonical(&["x"]));
        let flow = Flow::new(&e("1/2*p_x^2"), &b, HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 0.0).with("p_x", 1.0);
        let g = TimeGrid::new(0.0, 1e-3, 10_000);
        let t = integrate(&flow, &init, &MultiplierPolicy::zero(), g).unwrap();
        assert!((t.series("x").unwrap()[10_000] - 10.0).abs() < 1e-10);
        assert_eq!(t, integrate(&flow, &init, &MultiplierPolicy::zero(), g).unwrap());
        let csv = t.to_csv();
        assert!(csv.starts_with("t,x,p_x\n0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0\n"));
    }

    #[test]
    fn blow_up_aborts() {
        let b = BracketStructure::poisson(PhaseSpace::canonical(&["x"]));
        // ẋ = exp(x) reaches infinity in finite time
        let flow = Flow::new(&e("exp(x)*p_x"), &b, HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 0.0).with("p_x", 0.0);
        let r = integrate(&flow, &init, &MultiplierPolicy::zero(), TimeGrid::new(0.0, 0.1, 100));
        assert!(matches!(r, Err(DynamicsError::AbortedTrajectory { .. })));
    }

    #[test]
    fn multiplier_functions() {
        let tab = ResolvedFn::new(&MultiplierFn::Tabulated { t0: 0.0, dt: 1.0, values: vec![0.0, 2.0, 4.0] }, "mu");
        assert_eq!(tab.eval(0.5), 1.0);
        assert_eq!(tab.eval(-1.0), 0.0);
        assert_eq!(tab.eval(10.0), 4.0);
        let r = MultiplierFn::random(3, 1.0, 2.0);
        let a = ResolvedFn::new(&r, "mu");
        let b = ResolvedFn::new(&r, "mu");
        let c = ResolvedFn::new(&r, "lambda");
        assert_eq!(a.eval(0.7), b.eval(0.7));
        assert_ne!(a.eval(0.7), c.eval(0.7));
        assert!(a.eval(0.7).abs() <= 1.0 * 8f64.sqrt());
        let missing = MultiplierPolicy::default();
        let sys = system_a();
        let ht = crate::constraints::total_hamiltonian(&sys);
        let flow = Flow::new(&ht, &BracketStructure::poisson(sys.space.clone()), HamiltonianKind::Total).unwrap();
        let init = PhasePoint::new().with("x", 1.0).with("y", 0.0).with("p_x", 0.0).with("p_y", 0.0);
        assert!(matches!(
            integrate(&flow, &init, &missing, TimeGrid::new(0.0, 0.1, 1)),
            Err(DynamicsError::NoPolicy(_))
        ));
    }
}
