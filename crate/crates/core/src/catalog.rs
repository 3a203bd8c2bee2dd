//! Built-in systems: the two counterexamples and two regular controls.

use crate::constraints::ConstraintClass;
use crate::symbolic::{parse_expr, PhaseExpr, PhasePoint};
use crate::system_file::{parse, SystemFile};

const COUNTEREXAMPLE_A: &str = "\
system: counterexample-a
variables:
  coordinates = x, y
lagrangian:
  L = 1/2*exp(y)*x_dot^2
gauge: y - x
roots:
  1/2*exp(-y)*p_x^2 -> p_x
policy:
  mu = random(seed=1, amplitude=1, cutoff=2)
  default = random(seed=2, amplitude=1, cutoff=2)
integrate:
  hamiltonian = fixed
  h = 0.001
  steps = 10000
  x(0) = 1
  p_x(0) = 0
quantum:
  axis = x, length=20, points=128
  ordering = sandwich
  dt = 0.01
  steps = 1000
";

const CAWLEY: &str = "\
system: cawley
variables:
  coordinates = x, y, z
lagrangian:
  L = x_dot*z_dot + 1/2*y*z^2
gauge: y - 2*x + p_z
roots:
  1/2*z^2 -> z
  z*p_x -> p_x
policy:
  mu = random(seed=1, amplitude=1, cutoff=2)
  default = random(seed=2, amplitude=1, cutoff=2)
integrate:
  hamiltonian = fixed
  h = 0.001
  steps = 10000
  x(0) = 0
  p_x(0) = 0
  z(0) = 0
  p_z(0) = 2
quantum:
  axis = x, length=20, points=128
  axis = p_z, length=20, points=128
  ordering = sandwich
  dt = 0.01
  steps = 1000
";

const HARMONIC_OSCILLATOR: &str = "\
system: harmonic-oscillator
variables:
  coordinates = x
lagrangian:
  L = 1/2*x_dot^2 - 1/2*x^2
integrate:
  hamiltonian = total
  h = 0.001
  steps = 10000
  x(0) = 1
  p_x(0) = 0
quantum:
  axis = x, length=20, points=128
  dt = 0.001
  steps = 1000
  initial = gaussian(center=0, width=1, momentum=0)
";

const FREE_PARTICLE: &str = "\
system: free-particle
variables:
  coordinates = x
lagrangian:
  L = 1/2*x_dot^2
integrate:
  hamiltonian = total
  h = 0.001
  steps = 10000
  x(0) = 0
  p_x(0) = 1
quantum:
  axis = x, length=40, points=1024
  dt = 0.001
  steps = 1000
  initial = gaussian(center=0, width=1, momentum=0.5)
";

pub const IDS: [&str; 4] = ["counterexample-a", "cawley", "harmonic-oscillator", "free-particle"];

/// One expected constraint of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedRecord {
    pub expr: PhaseExpr,
    pub generation: usize,
    pub class: ConstraintClass,
    pub effective: bool,
}

/// Closed-form classical solution of the physical variables.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `v(t) = v(0)`.
    Constant { var: String },
    /// `v(t) = v(0) + t·r(0)` with `r` conserved.
    Linear { var: String, rate: String },
    /// Unit-frequency oscillator.
    Oscillator { coordinate: String, momentum: String },
}

impl ClosedForm {
    pub fn predict(&self, init: &PhasePoint, t: f64) -> Vec<(String, f64)> {
        let at = |v: &str| init.get(v).unwrap_or(0.0);
        match self {
            ClosedForm::Constant { var } => vec![(var.clone(), at(var))],
            ClosedForm::Linear { var, rate } => vec![(var.clone(), at(var) + t * at(rate))],
            ClosedForm::Oscillator { coordinate, momentum } => {
                let (x, p) = (at(coordinate), at(momentum));
                vec![
                    (coordinate.clone(), x * t.cos() + p * t.sin()),
                    (momentum.clone(), -x * t.sin() + p * t.cos()),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub primaries: Vec<PhaseExpr>,
    pub chain: Vec<ExpectedRecord>,
    pub castellani_length: usize,
    pub solution: ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
    pub file: SystemFile,
    pub expected: Expected,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown system `{0}` (built-ins: counterexample-a, cawley, harmonic-oscillator, free-particle)")]
pub struct UnknownEntry(pub String);

fn e(s: &str) -> PhaseExpr {
    parse_expr(s).expect("catalog expression")
}

fn rec(expr: &str, generation: usize, effective: bool) -> ExpectedRecord {
    ExpectedRecord { expr: e(expr), generation, class: ConstraintClass::First, effective }
}

pub fn get(id: &str) -> Result<CatalogEntry, UnknownEntry> {
    let (summary, text, expected) = match id {
        "counterexample-a" => (
            "L = 1/2 e^y xdot^2: ineffective secondary, x is frozen",
            COUNTEREXAMPLE_A,
            Expected {
                primaries: vec![e("p_y")],
                chain: vec![rec("p_y", 0, true), rec("1/2*exp(-y)*p_x^2", 1, false)],
                castellani_length: 1,
                solution: ClosedForm::Constant { var: "x".into() },
            },
        ),
        "cawley" => (
            "L = xdot zdot + 1/2 y z^2: ineffective secondary and tertiary",
            CAWLEY,
            Expected {
                primaries: vec![e("p_y")],
                chain: vec![rec("p_y", 0, true), rec("1/2*z^2", 1, false), rec("z*p_x", 2, false)],
                castellani_length: 1,
                solution: ClosedForm::Linear { var: "x".into(), rate: "p_z".into() },
            },
        ),
        "harmonic-oscillator" => (
            "regular control: L = 1/2 xdot^2 - 1/2 x^2",
            HARMONIC_OSCILLATOR,
            Expected {
                primaries: vec![],
                chain: vec![],
                castellani_length: 0,
                solution: ClosedForm::Oscillator { coordinate: "x".into(), momentum: "p_x".into() },
            },
        ),
        "free-particle" => (
            "regular control: L = 1/2 xdot^2",
            FREE_PARTICLE,
            Expected {
                primaries: vec![],
                chain: vec![],
                castellani_length: 0,
                solution: ClosedForm::Linear { var: "x".into(), rate: "p_x".into() },
            },
        ),
        other => return Err(UnknownEntry(other.to_string())),
    };
    let id = IDS.iter().copied().find(|k| *k == id).expect("listed id");
    Ok(CatalogEntry { id, summary, text, file: parse(text).expect("catalog file parses"), expected })
}

pub fn all() -> Vec<CatalogEntry> {
    IDS.iter().map(|id| get(id).expect("listed id")).collect()
}
