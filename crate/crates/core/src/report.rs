//! Text and structured (JSON) reports.
//!
//! Structured reports are built from the row types below and carry
//! `"schema": "dirac-report/1"`. Field order is fixed by declaration order,
//! so identical inputs always produce identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::constraints::{Closure, ConstraintClass, ConstraintRecord, DeterminedMultiplier, GaugeLink, Origin};
use crate::dynamics::{Drift, HamiltonianKind, TimeGrid};
use crate::pipeline::{Analysis, IntegrationRun, QuantumRun};
use crate::quantum::{Axis, OrderingRule};
use crate::symbolic::PhaseExpr;

pub const SCHEMA: &str = "dirac-report/1";

pub(crate) fn expr_text<S: Serializer>(e: &PhaseExpr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(format!("unknown format `{other}` (expected text or structured)")),
        }
    }
}

fn strings(v: &[PhaseExpr]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

fn matrix(m: &[Vec<PhaseExpr>]) -> Vec<Vec<String>> {
    m.iter().map(|r| strings(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRow {
    pub generation: usize,
    pub branch: usize,
    pub expression: String,
    pub class: ConstraintClass,
    pub effective: bool,
    pub sign: i8,
    pub origin: Origin,
    pub roots: Vec<String>,
}

impl From<&ConstraintRecord> for ConstraintRow {
    fn from(r: &ConstraintRecord) -> Self {
        ConstraintRow {
            generation: r.generation,
            branch: r.branch,
            expression: r.expr.to_string(),
            class: r.class,
            effective: r.effective,
            sign: r.sign,
            origin: r.origin,
            roots: strings(&r.roots_used),
        }
    }
}

pub fn closure_text(c: &Closure) -> String {
    match c {
        Closure::Vanishes { branch, generation } => {
            format!("branch {branch} closed: generation-{generation} candidate vanishes on the surface")
        }
        Closure::Reproduces { branch, generation, of } => {
            format!("branch {branch} closed: generation-{generation} candidate reproduces constraint {of}")
        }
        Closure::FixesMultiplier { branch, generation, condition } => {
            format!("branch {branch} closed: generation-{generation} candidate fixes a multiplier via {condition} = 0")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CastellaniSection {
    pub generator: String,
    pub links: Vec<GaugeLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub symbol: String,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedSection {
    pub hamiltonian: String,
    pub added: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeSection {
    pub conditions: Vec<String>,
    pub constraints: Vec<ConstraintRow>,
    pub bracket_matrix: Vec<Vec<String>>,
    pub second_class: Vec<String>,
    pub second_class_matrix: Vec<Vec<String>>,
    pub multipliers: Vec<DeterminedMultiplier>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub variable: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSection {
    pub variables: Vec<String>,
    pub hamiltonian: String,
    pub eliminated: Vec<Assignment>,
    pub initial_conditions: Vec<String>,
    pub c_inverse: Vec<Vec<String>>,
    pub gribov_risk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub system: Option<String>,
    pub variables: Vec<String>,
    pub canonical_hamiltonian: String,
    pub primaries: Vec<String>,
    pub total_hamiltonian: String,
    pub constraints: Vec<ConstraintRow>,
    pub bracket_matrix: Vec<Vec<String>>,
    pub closures: Vec<String>,
    pub castellani: CastellaniSection,
    pub extended: ExtendedSection,
    pub gauge: Option<GaugeSection>,
    pub reduced: Option<ReducedSection>,
    pub reduction_note: Option<String>,
}

impl AnalysisReport {
    pub fn new(a: &Analysis) -> Self {
        let space = &a.system.space;
        AnalysisReport {
            schema: SCHEMA,
            command: "analyze",
            system: a.name.clone(),
            variables: space.pairs().into_iter().flat_map(|(q, p)| [q, p]).collect(),
            canonical_hamiltonian: a.system.h_canonical.to_string(),
            primaries: strings(&a.system.primaries),
            total_hamiltonian: a.total_hamiltonian.to_string(),
            constraints: a.records.iter().map(ConstraintRow::from).collect(),
            bracket_matrix: matrix(&a.bracket_matrix),
            closures: a.chain.closures.iter().map(closure_text).collect(),
            castellani: CastellaniSection { generator: a.castellani.to_text(), links: a.castellani.links.clone() },
            extended: ExtendedSection {
                hamiltonian: a.extended.h.to_string(),
                added: a
                    .extended
                    .added
                    .iter()
                    .map(|(s, c)| Term { symbol: s.clone(), constraint: c.to_string() })
                    .collect(),
            },
            gauge: a.gauge.as_ref().map(|g| GaugeSection {
                conditions: strings(&g.conditions),
                constraints: g.records.iter().map(ConstraintRow::from).collect(),
                bracket_matrix: matrix(&g.bracket_matrix),
                second_class: strings(&g.second_class),
                second_class_matrix: matrix(&g.second_class_matrix),
                multipliers: g.multipliers.clone(),
            }),
            reduced: a.reduced.as_ref().map(|r| ReducedSection {
                variables: r.system.space.pairs().into_iter().flat_map(|(q, p)| [q, p]).collect(),
                hamiltonian: r.h_fixed.to_string(),
                eliminated: r
                    .eliminated
                    .iter()
                    .map(|(v, e)| Assignment { variable: v.clone(), value: e.to_string() })
                    .collect(),
                initial_conditions: strings(&r.initial_conditions),
                c_inverse: matrix(&r.bracket.c_matrix_inverse),
                gribov_risk: r.gribov_risk,
            }),
            reduction_note: a.reduction_note.clone(),
        }
    }
}

fn class_text(c: ConstraintClass) -> &'static str {
    match c {
        ConstraintClass::First => "first",
        ConstraintClass::Second => "second",
        ConstraintClass::Undetermined => "undetermined",
    }
}

fn origin_text(o: Origin) -> &'static str {
    match o {
        Origin::Primary => "primary",
        Origin::Consistency => "consistency",
        Origin::Gauge => "gauge",
    }
}

fn constraint_table(out: &mut String, rows: &[ConstraintRow]) {
    let width = rows.iter().map(|r| r.expression.len()).max().unwrap_or(0).max(10);
    let _ = writeln!(out, "  gen  {:<width$}  class   effective  origin", "expression");
    for r in rows {
        let _ = write!(
            out,
            "  {:<3}  {:<width$}  {:<6}  {:<9}  {}",
            r.generation,
            r.expression,
            r.class_text(),
            r.effective,
            r.origin_text()
        );
        if !r.roots.is_empty() {
            let _ = write!(out, "  roots: {}", r.roots.join(", "));
        }
        out.push('\n');
    }
}

impl ConstraintRow {
    fn class_text(&self) -> &'static str {
        class_text(self.class)
    }
    fn origin_text(&self) -> &'static str {
        origin_text(self.origin)
    }
}

fn matrix_text(out: &mut String, m: &[Vec<String>]) {
    for row in m {
        let _ = writeln!(out, "    [{}]", row.join(", "));
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "system: {}", self.system.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(o, "variables: {}", self.variables.join(", "));
        let _ = writeln!(o, "canonical hamiltonian: {}", self.canonical_hamiltonian);
        let _ = writeln!(o, "primary constraints: {}", list_or_none(&self.primaries));
        let _ = writeln!(o, "total hamiltonian: {}", self.total_hamiltonian);
        let _ = writeln!(o, "\nconstraints ({}):", self.constraints.len());
        constraint_table(&mut o, &self.constraints);
        if !self.bracket_matrix.is_empty() {
            let _ = writeln!(o, "  bracket matrix:");
            matrix_text(&mut o, &self.bracket_matrix);
        }
        for c in &self.closures {
            let _ = writeln!(o, "  {c}");
        }
        let _ = writeln!(o, "\ngauge generator: G = {}", self.castellani.generator);
        let _ = writeln!(o, "extended hamiltonian: {}", self.extended.hamiltonian);
        if let Some(g) = &self.gauge {
            let _ = writeln!(o, "\ngauge conditions: {}", g.conditions.join(", "));
            constraint_table(&mut o, &g.constraints);
            let _ = writeln!(o, "  second class: {}", list_or_none(&g.second_class));
            matrix_text(&mut o, &g.second_class_matrix);
            for m in &g.multipliers {
                let _ = writeln!(o, "  {} = {}  (on surface: {})", m.symbol, m.raw, m.on_surface);
            }
        }
        match (&self.reduced, &self.reduction_note) {
            (Some(r), _) => {
                let _ = writeln!(o, "\nreduced variables: {}", list_or_none(&r.variables));
                let _ = writeln!(o, "gauge-fixed hamiltonian: {}", r.hamiltonian);
                for e in &r.eliminated {
                    let _ = writeln!(o, "  {} = {}", e.variable, e.value);
                }
                let _ = writeln!(o, "initial conditions: {}", list_or_none(&r.initial_conditions));
                if r.gribov_risk {
                    let _ = writeln!(o, "warning: nonlinear gauge solution, gauge copies possible");
                }
            }
            (None, Some(n)) => {
                let _ = writeln!(o, "\nno reduction: {n}");
            }
            (None, None) => {}
        }
        o
    }
}

fn list_or_none(v: &[String]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub variable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrateReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub system: Option<String>,
    pub hamiltonian_kind: HamiltonianKind,
    pub hamiltonian: String,
    pub equations: Vec<Assignment>,
    pub grid: TimeGrid,
    pub policy_seed: Option<u64>,
    pub initial_state: Vec<Value>,
    pub final_time: f64,
    pub final_state: Vec<Value>,
    pub drift: Vec<Drift>,
    pub warnings: Vec<String>,
}

impl IntegrateReport {
    pub fn new(name: Option<String>, run: &IntegrationRun) -> Self {
        let t = &run.trajectory;
        let values = |s: &[f64]| {
            t.variables
                .iter()
                .zip(s)
                .map(|(v, x)| Value { variable: v.clone(), value: *x })
                .collect()
        };
        let last = t.states.last().map(|s| s.as_slice()).unwrap_or(&[]);
        IntegrateReport {
            schema: SCHEMA,
            command: "integrate",
            system: name,
            hamiltonian_kind: t.hamiltonian_kind,
            hamiltonian: run.hamiltonian.to_string(),
            equations: run
                .equations
                .iter()
                .map(|(v, e)| Assignment { variable: v.clone(), value: e.to_string() })
                .collect(),
            grid: t.grid,
            policy_seed: t.policy_seed,
            initial_state: values(t.states.first().map(|s| s.as_slice()).unwrap_or(&[])),
            final_time: t.grid.time(t.states.len().saturating_sub(1)),
            final_state: values(last),
            drift: run.drift.clone(),
            warnings: run.notes.iter().chain(&t.warnings).cloned().collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "system: {}", self.system.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(o, "hamiltonian ({:?}): {}", self.hamiltonian_kind, self.hamiltonian);
        for e in &self.equations {
            let _ = writeln!(o, "  d{}/dt = {}", e.variable, e.value);
        }
        let _ = writeln!(o, "grid: t0 = {}, h = {}, steps = {}", self.grid.t0, self.grid.h, self.grid.steps);
        if let Some(s) = self.policy_seed {
            let _ = writeln!(o, "policy seed: {s}");
        }
        let _ = writeln!(o, "state at t = {}:", self.final_time);
        for (a, b) in self.initial_state.iter().zip(&self.final_state) {
            let _ = writeln!(o, "  {:<8} {:>24.17e} -> {:>24.17e}", a.variable, a.value, b.value);
        }
        if !self.drift.is_empty() {
            let _ = writeln!(o, "constraint drift:");
            for d in &self.drift {
                let _ = writeln!(o, "  {:<24} max |c| = {:.3e} at t = {}", d.constraint.to_string(), d.max_abs, d.at_time);
            }
        }
        for w in &self.warnings {
            let _ = writeln!(o, "warning: {w}");
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRow {
    pub constraint: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizeReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub system: Option<String>,
    pub hamiltonian: String,
    pub ordering: OrderingRule,
    pub axes: Vec<Axis>,
    pub hbar: f64,
    pub dt: f64,
    pub steps: usize,
    pub hermiticity_defect: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub norm_drift: f64,
    pub stationarity_defect: f64,
    pub conditions: Vec<ConditionRow>,
}

impl QuantizeReport {
    pub fn new(name: Option<String>, run: &QuantumRun) -> Self {
        QuantizeReport {
            schema: SCHEMA,
            command: "quantize",
            system: name,
            hamiltonian: run.hamiltonian.to_string(),
            ordering: run.ordering,
            axes: run.representation.axes.clone(),
            hbar: run.representation.hbar,
            dt: run.dt,
            steps: run.steps,
            hermiticity_defect: run.hermiticity_defect,
            energy_initial: run.energy_initial,
            energy_final: run.energy_final,
            norm_initial: run.norm_initial,
            norm_final: run.norm_final,
            norm_drift: (run.norm_final - run.norm_initial).abs(),
            stationarity_defect: run.stationarity_defect,
            conditions: run
                .condition_residuals
                .iter()
                .map(|(c, r)| ConditionRow { constraint: c.to_string(), max_residual: *r })
                .collect(),
        }
    }

    /// Largest constraint residual.
    pub fn defect(&self) -> f64 {
        self.conditions.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "system: {}", self.system.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(o, "hamiltonian: {}  (ordering {})", self.hamiltonian, self.ordering);
        for a in &self.axes {
            let _ = writeln!(o, "  axis {}: length {}, {} points", a.variable, a.length, a.points);
        }
        let _ = writeln!(o, "hbar = {}, dt = {}, steps = {}", self.hbar, self.dt, self.steps);
        let _ = writeln!(o, "hermiticity defect: {:.3e}", self.hermiticity_defect);
        let _ = writeln!(o, "energy: {:.6e} -> {:.6e}", self.energy_initial, self.energy_final);
        let _ = writeln!(o, "norm drift: {:.3e}", self.norm_drift);
        let _ = writeln!(o, "stationarity defect: {:.3e}", self.stationarity_defect);
        for c in &self.conditions {
            let _ = writeln!(o, "  constraint {}: max residual {:.3e}", c.constraint, c.max_residual);
        }
        let _ = writeln!(o, "defect: {:.3e}", self.defect());
        o
    }
}

/// Renders any report in the requested format.
pub fn render<R: Serialize>(report: &R, text: impl FnOnce(&R) -> String, format: Format) -> String {
    match format {
        Format::Text => text(report),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
