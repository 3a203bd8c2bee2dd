//! End-to-end runs driven by a system file.

use num_complex::Complex64;

use crate::constraints::{
    castellani, classify, determine_multipliers, gauge_records, generate_chain, mark_effectiveness, Chain,
    ChainOptions, ClassifyOptions, ConstraintClass, ConstraintError, ConstraintRecord, DeterminedMultiplier, GaugeGenerator, Origin,
    SystemDef,
};
use crate::dynamics::{
    constraint_drift, extended_hamiltonian, integrate, Drift, DynamicsError, ExtendedHamiltonian, Flow,
    HamiltonianKind, MultiplierFn, MultiplierPolicy, Trajectory,
};
use crate::quantum::{
    build_operator, distance, evolve, observables, prepare_initial, residual_norm, EvolveOptions, OrderingRule,
    QuantumError, Representation, WaveState,
};
use crate::reduction::{project, BracketStructure, ReducedSystem, ReductionError};
use crate::symbolic::{PhaseExpr, PhasePoint, SymbolicError};
use crate::system_file::{InitialState, IntegrateConfig, ParseError, QuantumConfig, SystemFile};

/// A failure, tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("system file: {0}")]
    Parse(#[from] ParseError),
    #[error("constraints: {0}")]
    Constraint(#[from] ConstraintError),
    #[error("reduction: {0}")]
    Reduction(#[from] ReductionError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("quantum: {0}")]
    Quantum(#[from] QuantumError),
    #[error("symbolic: {0}")]
    Symbolic(#[from] SymbolicError),
    #[error("reduction: no gauge-fixed system: {0}")]
    NoReduction(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl PipelineError {
    /// Module that failed and the system-file section it was working on.
    pub fn provenance(&self) -> (&'static str, &'static str) {
        match self {
            PipelineError::Parse(_) => ("system_file", "input"),
            PipelineError::Constraint(_) => ("constraint_engine", "lagrangian/hamiltonian"),
            PipelineError::Reduction(_) | PipelineError::NoReduction(_) => ("reduction", "gauge"),
            PipelineError::Dynamics(_) => ("classical_dynamics", "integrate"),
            PipelineError::Quantum(_) => ("quantum", "quantum"),
            PipelineError::Symbolic(_) => ("symbolic_core", "input"),
            PipelineError::Config(_) => ("cli_reporting", "options"),
        }
    }
}

/// Gauge-fixed view of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeAnalysis {
    pub conditions: Vec<PhaseExpr>,
    /// Chain plus gauge conditions, reclassified.
    pub records: Vec<ConstraintRecord>,
    pub bracket_matrix: Vec<Vec<PhaseExpr>>,
    /// Second-class constraints, gauge conditions first.
    pub second_class: Vec<PhaseExpr>,
    /// `{χ_a, χ_b}` on the surface for `second_class`.
    pub second_class_matrix: Vec<Vec<PhaseExpr>>,
    pub multipliers: Vec<DeterminedMultiplier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub name: Option<String>,
    pub system: SystemDef,
    pub total_hamiltonian: PhaseExpr,
    pub chain: Chain,
    /// Chain records, classified and marked for effectiveness without gauge conditions.
    pub records: Vec<ConstraintRecord>,
    pub bracket_matrix: Vec<Vec<PhaseExpr>>,
    pub castellani: GaugeGenerator,
    pub extended: ExtendedHamiltonian,
    pub gauge: Option<GaugeAnalysis>,
    pub reduced: Option<ReducedSystem>,
    /// Why no reduced system is available.
    pub reduction_note: Option<String>,
}

impl Analysis {
    /// Roots (or expressions) of the secondary constraints, unreduced.
    pub fn secondary_conditions(&self) -> Vec<PhaseExpr> {
        let mut out: Vec<PhaseExpr> = Vec::new();
        for r in self.records.iter().filter(|r| r.origin == Origin::Consistency) {
            let src = if r.roots_used.is_empty() { vec![r.expr.clone()] } else { r.roots_used.clone() };
            for s in src {
                if !out.iter().any(|x| s.rational_multiple_of(x).is_some()) {
                    out.push(s);
                }
            }
        }
        out
    }

    pub fn reduced(&self) -> Result<&ReducedSystem, PipelineError> {
        self.reduced.as_ref().ok_or_else(|| {
            PipelineError::NoReduction(self.reduction_note.clone().unwrap_or_else(|| "reduction unavailable".into()))
        })
    }
}

/// Constraint analysis, gauge fixing and reduction.
pub fn analyze(file: &SystemFile) -> Result<Analysis, PipelineError> {
    let system = file.to_system()?;
    analyze_system(system, file.name.clone())
}

pub fn analyze_system(system: SystemDef, name: Option<String>) -> Result<Analysis, PipelineError> {
    let chain = generate_chain(&system, ChainOptions::default())?;
    let classification = classify(&chain.records, &system, ClassifyOptions::default())?;
    let mut records = classification.records;
    mark_effectiveness(&mut records, &system)?;
    let castellani = castellani(&records);
    let extended = extended_hamiltonian(&system, &records)?;
    let gauge = if system.gauge_conditions.is_empty() {
        None
    } else {
        let mut all = records.clone();
        all.extend(gauge_records(&system));
        let fixed = classify(&all, &system, ClassifyOptions::default())?;
        let mut idx: Vec<usize> =
            (0..fixed.records.len()).filter(|&i| fixed.records[i].class == ConstraintClass::Second).collect();
        idx.sort_by_key(|&i| fixed.records[i].origin != Origin::Gauge);
        Some(GaugeAnalysis {
            conditions: system.gauge_conditions.clone(),
            second_class: idx.iter().map(|&i| fixed.records[i].expr.clone()).collect(),
            second_class_matrix: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| fixed.bracket_matrix[i][j].clone()).collect())
                .collect(),
            records: fixed.records,
            bracket_matrix: fixed.bracket_matrix,
            multipliers: determine_multipliers(&system, &records)?,
        })
    };
    let (reduced, reduction_note) = match project(&system, &records) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Analysis {
        name,
        total_hamiltonian: crate::constraints::total_hamiltonian(&system),
        system,
        chain,
        records,
        bracket_matrix: classification.bracket_matrix,
        castellani,
        extended,
        gauge,
        reduced,
        reduction_note,
    })
}

/// Command-line style overrides of a file's configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub policy: Option<MultiplierFn>,
    pub hamiltonian: Option<HamiltonianKind>,
}

impl Overrides {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if let Some(h) = self.h {
            if !(h.is_finite() && h > 0.0) {
                return Err(PipelineError::Config(format!("--h must be a positive number, got {h}")));
            }
        }
        if self.steps == Some(0) {
            return Err(PipelineError::Config("--steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn integrate_config(&self, file: &SystemFile) -> IntegrateConfig {
        let mut c = file.integrate.clone().unwrap_or_default();
        if let Some(h) = self.h {
            c.h = h;
        }
        if let Some(n) = self.steps {
            c.steps = n;
        }
        if let Some(k) = self.hamiltonian {
            c.hamiltonian = k;
        }
        c
    }

    pub fn quantum_config(&self, file: &SystemFile) -> QuantumConfig {
        let mut c = file.quantum.clone().unwrap_or_default();
        if let Some(dt) = self.h {
            c.dt = Some(dt);
        }
        if let Some(n) = self.steps {
            c.steps = n;
        }
        c
    }

    /// File policy (zero if absent), with `policy` replacing every function
    /// and `seed` replacing every random seed.
    pub fn policy(&self, file: &SystemFile) -> MultiplierPolicy {
        let mut p = match &self.policy {
            Some(f) => MultiplierPolicy::uniform(f.clone()),
            None => file.policy.clone().unwrap_or_else(MultiplierPolicy::zero),
        };
        if let Some(s) = self.seed {
            let reseed = |f: &mut MultiplierFn| {
                if let MultiplierFn::Random { seed, .. } = f {
                    *seed = s;
                }
            };
            p.per_symbol.values_mut().for_each(reseed);
            p.default.iter_mut().for_each(reseed);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationRun {
    pub hamiltonian: PhaseExpr,
    pub equations: Vec<(String, PhaseExpr)>,
    pub trajectory: Trajectory,
    pub drift: Vec<Drift>,
    pub notes: Vec<String>,
}

fn dedup(list: &mut Vec<PhaseExpr>, e: PhaseExpr) {
    if !e.is_zero() && !list.iter().any(|x| e.rational_multiple_of(x).is_some()) {
        list.push(e);
    }
}

/// Flow of the requested Hamiltonian with its initial conditions and the
/// constraints whose drift is monitored.
pub fn flow_for(a: &Analysis, kind: HamiltonianKind) -> Result<(Flow, PhaseExpr, Vec<PhaseExpr>), PipelineError> {
    let mut monitored = Vec::new();
    let (h, bracket, conditions) = match kind {
        HamiltonianKind::Total | HamiltonianKind::Extended => {
            for r in &a.records {
                dedup(&mut monitored, r.expr.clone());
            }
            let conditions = a.secondary_conditions();
            for c in &conditions {
                dedup(&mut monitored, c.clone());
            }
            if kind == HamiltonianKind::Total {
                (a.total_hamiltonian.clone(), BracketStructure::poisson(a.system.space.clone()), conditions)
            } else {
                (a.extended.h.clone(), BracketStructure::poisson(a.extended.space.clone()), conditions)
            }
        }
        HamiltonianKind::Fixed => {
            let red = a.reduced()?;
            for r in &a.records {
                dedup(&mut monitored, red.restrict(&r.expr)?);
            }
            for c in &red.initial_conditions {
                dedup(&mut monitored, c.clone());
            }
            (
                red.h_fixed.clone(),
                BracketStructure::poisson(red.system.space.clone()),
                red.initial_conditions.clone(),
            )
        }
    };
    let flow = Flow::new(&h, &bracket, kind)?.with_initial_conditions(conditions);
    Ok((flow, h, monitored))
}

/// Starting point: listed values, zero elsewhere; values for variables the
/// flow does not carry are reported and ignored.
pub fn initial_point(flow: &Flow, a: &Analysis, values: &[(String, f64)]) -> (PhasePoint, Vec<String>) {
    let mut pt: PhasePoint = flow.variables.iter().map(|v| (v.as_str(), 0.0)).collect();
    let mut notes = Vec::new();
    for (v, x) in values {
        if flow.variables.contains(v) {
            pt.set(v, *x);
        } else if a.system.space.contains(v) {
            notes.push(format!("{v}(0) = {x} ignored: {v} is not a variable of this flow"));
        }
    }
    (pt, notes)
}

pub fn run_integrate(
    a: &Analysis,
    cfg: &IntegrateConfig,
    policy: &MultiplierPolicy,
) -> Result<IntegrationRun, PipelineError> {
    let (flow, h, monitored) = flow_for(a, cfg.hamiltonian)?;
    let (init, notes) = initial_point(&flow, a, &cfg.initial);
    let trajectory = integrate(&flow, &init, policy, cfg.grid())?;
    let drift = constraint_drift(&trajectory, &monitored)?;
    Ok(IntegrationRun { hamiltonian: h, equations: flow.equations.clone(), trajectory, drift, notes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRun {
    pub representation: Representation,
    pub hamiltonian: PhaseExpr,
    pub ordering: OrderingRule,
    pub conditions: Vec<PhaseExpr>,
    pub dt: f64,
    pub steps: usize,
    pub hermiticity_defect: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub max_step_norm_change: f64,
    /// `‖ψ(T) − ψ(0)‖ / ‖ψ(0)‖`.
    pub stationarity_defect: f64,
    /// Largest `‖Cψ(t)‖` over the recorded states, per condition.
    pub condition_residuals: Vec<(PhaseExpr, f64)>,
    pub initial: WaveState,
    pub final_state: WaveState,
}

/// Seed state sampled on the grid.
pub fn seed_state(rep: &Representation, initial: &InitialState) -> WaveState {
    match *initial {
        InitialState::Constant => WaveState::from_fn(rep, |_| Complex64::new(1.0, 0.0)),
        InitialState::Gaussian { center, width, momentum } => WaveState::from_fn(rep, |x| {
            let r2: f64 = x.iter().map(|v| (v - center) * (v - center)).sum();
            let phase: f64 = x.iter().map(|v| momentum * v).sum::<f64>() / rep.hbar;
            Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
        }),
    }
}

pub fn run_quantize(a: &Analysis, cfg: &QuantumConfig) -> Result<QuantumRun, PipelineError> {
    let red = a.reduced()?;
    let space = &red.system.space;
    let axes: Vec<(&str, f64, usize)> = if cfg.axes.is_empty() {
        space
            .variables()
            .iter()
            .filter(|v| v.kind == crate::symbolic::VarKind::Coordinate)
            .map(|v| (v.name.as_str(), 20.0, 128))
            .collect()
    } else {
        cfg.axes.iter().map(|x| (x.variable.as_str(), x.length, x.points)).collect()
    };
    let rep = Representation::new(space, &axes, cfg.hbar)?;
    let conditions = if cfg.conditions.is_empty() {
        red.initial_conditions.clone()
    } else {
        cfg.conditions.clone()
    };
    let op = build_operator(&red.h_fixed, &rep, cfg.ordering)?;
    let seed = seed_state(&rep, &cfg.initial);
    let psi0 = prepare_initial(&rep, &conditions, Some(&seed))?;
    let dt = cfg.dt.unwrap_or_else(|| EvolveOptions::default_dt(&rep));
    let ev = evolve(&op, &rep, &psi0, EvolveOptions::new(dt, cfg.steps).recording(cfg.record_every))?;
    let condition_residuals = conditions
        .iter()
        .map(|c| {
            let cop = build_operator(c, &rep, OrderingRule::SymmetricHalf)?;
            let worst = ev.trace.iter().map(|s| residual_norm(&cop, &rep, s)).fold(0.0, f64::max);
            Ok((c.clone(), worst))
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let start = observables(&op, &rep, &psi0, None);
    let end = observables(&op, &rep, &ev.state, None);
    Ok(QuantumRun {
        hamiltonian: red.h_fixed.clone(),
        ordering: cfg.ordering,
        conditions,
        dt,
        steps: cfg.steps,
        hermiticity_defect: op.hermiticity_defect(),
        energy_initial: start.energy,
        energy_final: end.energy,
        norm_initial: ev.initial_norm,
        norm_final: ev.final_norm,
        max_step_norm_change: ev.max_step_norm_change,
        stationarity_defect: distance(&rep, &ev.state, &psi0) / psi0.norm(&rep),
        condition_residuals,
        initial: psi0,
        final_state: ev.state,
        representation: rep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_integrations() {
        let a = analyze(&catalog::get("cawley").unwrap().file).unwrap();
        let file = &catalog::get("cawley").unwrap().file;
        let run = run_integrate(&a, &Overrides::default().integrate_config(file), &MultiplierPolicy::zero()).unwrap();
        let last = run.trajectory.point(run.trajectory.states.len() - 1);
        assert!((last.get("x").unwrap() - 20.0).abs() < 1e-6);
        assert!(run.drift.iter().all(|d| d.max_abs < 1e-10));
        assert!(run.notes.is_empty());

        let overrides = Overrides { hamiltonian: Some(HamiltonianKind::Total), steps: Some(100), ..Default::default() };
        let cfg = overrides.integrate_config(file);
        let run = run_integrate(&a, &cfg, &overrides.policy(file)).unwrap();
        assert_eq!(run.trajectory.variables.len(), 6);
        assert!(run.trajectory.warnings.is_empty());
    }

    #[test]
    fn seed_override_reaches_every_random_function() {
        let file = &catalog::get("counterexample-a").unwrap().file;
        let p = Overrides { seed: Some(9), ..Default::default() }.policy(file);
        assert_eq!(p.get("mu"), Some(&MultiplierFn::random(9, 1.0, 2.0)));
        assert_eq!(p.get("lambda"), Some(&MultiplierFn::random(9, 1.0, 2.0)));
        let p = Overrides { policy: Some(MultiplierFn::Zero), ..Default::default() }.policy(file);
        assert_eq!(p.get("mu"), Some(&MultiplierFn::Zero));
    }

    #[test]
    fn counterexample_a_quantizes_to_a_stationary_state() {
        let entry = catalog::get("counterexample-a").unwrap();
        let a = analyze(&entry.file).unwrap();
        let run = run_quantize(&a, &Overrides::default().quantum_config(&entry.file)).unwrap();
        assert!(run.energy_final.abs() < 1e-10);
        assert!(run.stationarity_defect < 1e-10);
        assert!(run.condition_residuals.iter().all(|(_, r)| *r < 1e-9));
        assert_eq!(run.conditions, vec![crate::symbolic::parse_expr("p_x").unwrap()]);
    }

    #[test]
    fn missing_reduction_is_reported() {
        let mut file = catalog::get("counterexample-a").unwrap().file;
        file.gauge.clear();
        let a = analyze(&file).unwrap();
        assert!(a.reduced.is_none());
        let cfg = IntegrateConfig::default();
        assert!(matches!(
            run_integrate(&a, &cfg, &MultiplierPolicy::zero()),
            Err(PipelineError::NoReduction(_))
        ));
    }
}
