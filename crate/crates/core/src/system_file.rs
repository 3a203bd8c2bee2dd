//! Line-oriented system definition files.
//!
//! ```text
//! # system A
//! system: counterexample-a
//! variables:
//!   coordinates = x, y
//! lagrangian:
//!   L = 1/2*exp(y)*x_dot^2
//! gauge: y - x
//! roots:
//!   1/2*exp(-y)*p_x^2 -> p_x
//! policy:
//!   mu = random(seed=1, amplitude=1, cutoff=2)
//! integrate:
//!   hamiltonian = fixed
//!   h = 0.001
//!   steps = 10000
//!   x(0) = 1
//! quantum:
//!   axis = x, length=20, points=128
//!   ordering = sandwich
//! ```
//!
//! A `section:` header may carry its first entry on the same line. Momenta are
//! always named `p_<coordinate>` and velocities `<coordinate>_dot`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::constraints::{legendre, multiplier_names, velocity_symbol, ConstraintError, LagrangianDef, SystemDef};
use crate::dynamics::{HamiltonianKind, MultiplierFn, MultiplierPolicy, TimeGrid};
use crate::quantum::OrderingRule;
use crate::symbolic::{parse_expr_with, PhaseExpr, PhaseSpace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Lagrangian(PhaseExpr),
    Hamiltonian { h: PhaseExpr, primaries: Vec<PhaseExpr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateConfig {
    pub hamiltonian: HamiltonianKind,
    pub t0: f64,
    pub h: f64,
    pub steps: usize,
    /// Unlisted variables start at zero.
    pub initial: Vec<(String, f64)>,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            hamiltonian: HamiltonianKind::Fixed,
            t0: 0.0,
            h: 1e-3,
            steps: 10_000,
            initial: Vec::new(),
        }
    }
}

impl IntegrateConfig {
    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.t0, self.h, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisConfig {
    pub variable: String,
    pub length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Constant,
    Gaussian { center: f64, width: f64, momentum: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumConfig {
    pub axes: Vec<AxisConfig>,
    pub hbar: f64,
    /// Defaults to `1e-3·h²` of the finest axis.
    pub dt: Option<f64>,
    pub steps: usize,
    pub ordering: OrderingRule,
    /// Kernel conditions on ψ(0); empty means the reduced initial conditions.
    pub conditions: Vec<PhaseExpr>,
    pub initial: InitialState,
    pub record_every: usize,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        QuantumConfig {
            axes: Vec::new(),
            hbar: 1.0,
            dt: None,
            steps: 1000,
            ordering: OrderingRule::SymmetricHalf,
            conditions: Vec::new(),
            initial: InitialState::Constant,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub name: Option<String>,
    pub coordinates: Vec<String>,
    pub source: Source,
    pub gauge: Vec<PhaseExpr>,
    pub roots: Vec<(PhaseExpr, Vec<PhaseExpr>)>,
    pub policy: Option<MultiplierPolicy>,
    pub integrate: Option<IntegrateConfig>,
    pub quantum: Option<QuantumConfig>,
}

impl SystemFile {
    pub fn momenta(&self) -> Vec<String> {
        self.coordinates.iter().map(|q| format!("p_{q}")).collect()
    }

    pub fn space(&self) -> PhaseSpace {
        let coords: Vec<&str> = self.coordinates.iter().map(String::as_str).collect();
        PhaseSpace::canonical(&coords)
    }

    /// The constrained system with gauge conditions and root hints attached.
    pub fn to_system(&self) -> Result<SystemDef, ConstraintError> {
        let mut sys = match &self.source {
            Source::Lagrangian(l) => legendre(&LagrangianDef {
                coordinates: self.coordinates.clone(),
                lagrangian: l.clone(),
            })?,
            Source::Hamiltonian { h, primaries } => {
                let names = multiplier_names(primaries.len());
                let mut space = self.space();
                for m in &names {
                    space = space.with_parameter(m)?;
                }
                SystemDef::new(space, h.clone(), primaries.clone(), names)?
            }
        };
        for g in &self.gauge {
            sys = sys.with_gauge(g.clone());
        }
        for (c, r) in &self.roots {
            sys = sys.with_roots(c.clone(), r.clone());
        }
        Ok(sys)
    }

    /// Canonical text; `parse(&f.to_text()) == Ok(f)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(n) = &self.name {
            let _ = writeln!(out, "system: {n}");
        }
        let _ = writeln!(out, "variables:\n  coordinates = {}", self.coordinates.join(", "));
        match &self.source {
            Source::Lagrangian(l) => {
                let _ = writeln!(out, "lagrangian:\n  L = {l}");
            }
            Source::Hamiltonian { h, primaries } => {
                let _ = writeln!(out, "hamiltonian:\n  H = {h}");
                for p in primaries {
                    let _ = writeln!(out, "  primary = {p}");
                }
            }
        }
        if !self.gauge.is_empty() {
            out.push_str("gauge:\n");
            for g in &self.gauge {
                let _ = writeln!(out, "  {g}");
            }
        }
        if !self.roots.is_empty() {
            out.push_str("roots:\n");
            for (c, r) in &self.roots {
                let rs: Vec<String> = r.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(out, "  {c} -> {}", rs.join(", "));
            }
        }
        if let Some(p) = &self.policy {
            out.push_str("policy:\n");
            if let Some(d) = &p.default {
                let _ = writeln!(out, "  default = {}", multiplier_fn_text(d));
            }
            for (s, f) in &p.per_symbol {
                let _ = writeln!(out, "  {s} = {}", multiplier_fn_text(f));
            }
        }
        if let Some(c) = &self.integrate {
            let kind = match c.hamiltonian {
                HamiltonianKind::Total => "total",
                HamiltonianKind::Fixed => "fixed",
                HamiltonianKind::Extended => "extended",
            };
            let _ = writeln!(
                out,
                "integrate:\n  hamiltonian = {kind}\n  t0 = {}\n  h = {}\n  steps = {}",
                c.t0, c.h, c.steps
            );
            for (v, x) in &c.initial {
                let _ = writeln!(out, "  {v}(0) = {x}");
            }
        }
        if let Some(q) = &self.quantum {
            out.push_str("quantum:\n");
            for a in &q.axes {
                let _ = writeln!(out, "  axis = {}, length={}, points={}", a.variable, a.length, a.points);
            }
            let _ = writeln!(out, "  hbar = {}", q.hbar);
            if let Some(dt) = q.dt {
                let _ = writeln!(out, "  dt = {dt}");
            }
            let _ = writeln!(out, "  steps = {}\n  ordering = {}\n  record = {}", q.steps, q.ordering, q.record_every);
            for c in &q.conditions {
                let _ = writeln!(out, "  condition = {c}");
            }
            match q.initial {
                InitialState::Constant => out.push_str("  initial = constant\n"),
                InitialState::Gaussian { center, width, momentum } => {
                    let _ = writeln!(
                        out,
                        "  initial = gaussian(center={center}, width={width}, momentum={momentum})"
                    );
                }
            }
        }
        out
    }
}

/// Text form of a multiplier function, as accepted by [`parse_multiplier_fn`].
pub fn multiplier_fn_text(f: &MultiplierFn) -> String {
    match f {
        MultiplierFn::Zero => "zero".into(),
        MultiplierFn::Constant { value } => format!("constant({value})"),
        MultiplierFn::Tabulated { t0, dt, values } => {
            let vs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("table(t0={t0}, dt={dt}, values={})", vs.join(" "))
        }
        MultiplierFn::Random { seed, amplitude, cutoff } => {
            format!("random(seed={seed}, amplitude={amplitude}, cutoff={cutoff})")
        }
    }
}

/// `name(k=v, ...)` or a bare `name`.
fn split_call(text: &str) -> Result<(&str, Vec<(&str, &str)>), String> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text, Vec::new()));
    };
    if !text.ends_with(')') {
        return Err(format!("missing `)` in `{text}`"));
    }
    let name = text[..open].trim();
    let inner = &text[open + 1..text.len() - 1];
    let mut args = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => args.push((k.trim(), v.trim())),
            None => args.push(("", part)),
        }
    }
    Ok((name, args))
}

fn number(s: &str, what: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a valid number for {what}"))
}

fn count(s: &str, what: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a valid count for {what}"))
}

/// `zero`, `constant(v)`, `random(seed=, amplitude=, cutoff=)` or
/// `table(t0=, dt=, values=v0 v1 ...)`.
pub fn parse_multiplier_fn(text: &str) -> Result<MultiplierFn, String> {
    let (name, args) = split_call(text)?;
    let get = |key: &str, default: Option<&'static str>| -> Result<String, String> {
        args.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.to_string())
            .or(default.map(String::from))
            .ok_or_else(|| format!("`{name}` needs `{key}=`"))
    };
    let known = |allowed: &[&str]| -> Result<(), String> {
        match args.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) if k.is_empty() => Err(format!("`{name}` arguments must be `key=value`")),
            Some((k, _)) => Err(format!("unknown argument `{k}` for `{name}`")),
            None => Ok(()),
        }
    };
    match name {
        "zero" if args.is_empty() => Ok(MultiplierFn::Zero),
        "constant" => match args.as_slice() {
            [("", v)] | [("value", v)] => Ok(MultiplierFn::Constant { value: number(v, "constant")? }),
            _ => Err("`constant` takes one value".into()),
        },
        "random" => {
            known(&["seed", "amplitude", "cutoff"])?;
            let seed = get("seed", None)?;
            Ok(MultiplierFn::Random {
                seed: seed.parse().map_err(|_| format!("`{seed}` is not a valid seed"))?,
                amplitude: number(&get("amplitude", Some("1"))?, "amplitude")?,
                cutoff: number(&get("cutoff", Some("2"))?, "cutoff")?,
            })
        }
        "table" => {
            known(&["t0", "dt", "values"])?;
            let values = get("values", None)?
                .split_whitespace()
                .map(|v| number(v, "table value"))
                .collect::<Result<Vec<_>, _>>()?;
            let dt = number(&get("dt", None)?, "dt")?;
            if dt <= 0.0 {
                return Err("table `dt` must be positive".into());
            }
            Ok(MultiplierFn::Tabulated { t0: number(&get("t0", Some("0"))?, "t0")?, dt, values })
        }
        other => Err(format!("unknown multiplier function `{other}` (zero, constant, random, table)")),
    }
}

struct Entry<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

impl<'a> Entry<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column + offset, message: message.into() }
    }

    /// `key = value` with the value's offset.
    fn key_value(&self) -> Result<(&'a str, &'a str, usize), ParseError> {
        let Some(eq) = self.text.find('=') else {
            return Err(self.error(0, "expected `key = value`"));
        };
        let key = self.text[..eq].trim();
        let raw = &self.text[eq + 1..];
        let value = raw.trim_start();
        let offset = eq + 1 + (raw.len() - value.len());
        if key.is_empty() {
            return Err(self.error(0, "missing key before `=`"));
        }
        Ok((key, value.trim_end(), offset))
    }
}

struct Section<'a> {
    name: &'a str,
    line: usize,
    entries: Vec<Entry<'a>>,
}

const SECTIONS: [&str; 9] = [
    "system",
    "variables",
    "lagrangian",
    "hamiltonian",
    "gauge",
    "roots",
    "policy",
    "integrate",
    "quantum",
];

fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if let Some(colon) = trimmed.find(':') {
            let name = trimmed[..colon].trim();
            if !is_identifier(name) {
                return Err(ParseError { line, column: lead + 1, message: format!("bad section header `{trimmed}`") });
            }
            if !SECTIONS.contains(&name) {
                return Err(ParseError {
                    line,
                    column: lead + 1,
                    message: format!("unknown section `{name}` (expected one of {})", SECTIONS.join(", ")),
                });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ParseError { line, column: lead + 1, message: format!("duplicate section `{name}`") });
            }
            let mut entries = Vec::new();
            let rest = &trimmed[colon + 1..];
            let inline = rest.trim();
            if !inline.is_empty() {
                let off = colon + 1 + (rest.len() - rest.trim_start().len());
                entries.push(Entry { line, column: lead + off + 1, text: inline });
            }
            sections.push(Section { name, line, entries });
        } else {
            let Some(current) = sections.last_mut() else {
                return Err(ParseError { line, column: lead + 1, message: "entry outside of any section".into() });
            };
            current.entries.push(Entry { line, column: lead + 1, text: trimmed });
        }
    }
    Ok(sections)
}

struct Names {
    coordinates: Vec<String>,
    momenta: Vec<String>,
    velocities: Vec<String>,
}

impl Names {
    fn phase(&self, v: &str) -> bool {
        self.coordinates.iter().any(|c| c == v) || self.momenta.iter().any(|c| c == v)
    }

    fn lagrangian(&self, v: &str) -> bool {
        self.coordinates.iter().any(|c| c == v) || self.velocities.iter().any(|c| c == v)
    }
}

fn expression(entry: &Entry, text: &str, offset: usize, declared: &dyn Fn(&str) -> bool) -> Result<PhaseExpr, ParseError> {
    parse_expr_with(text, declared).map_err(|e| entry.error(offset + e.column - 1, e.message))
}

/// Parse a system file.
pub fn parse(text: &str) -> Result<SystemFile, ParseError> {
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let first_line = sections.first().map_or(1, |s| s.line);

    let name = match find("system") {
        None => None,
        Some(s) => match s.entries.as_slice() {
            [e] => {
                let t = match e.key_value() {
                    Ok(("name", v, _)) => v,
                    _ => e.text,
                };
                Some(t.to_string())
            }
            _ => return Err(ParseError { line: s.line, column: 1, message: "`system` takes one name".into() }),
        },
    };

    let Some(vars) = find("variables") else {
        return Err(ParseError { line: first_line, column: 1, message: "missing `variables` section".into() });
    };
    let mut coordinates: Option<Vec<String>> = None;
    for e in &vars.entries {
        let (key, value, off) = e.key_value()?;
        if key != "coordinates" {
            return Err(e.error(0, format!("unknown key `{key}` in `variables` (expected `coordinates`)")));
        }
        if coordinates.is_some() {
            return Err(e.error(0, "duplicate `coordinates`"));
        }
        let mut list = Vec::new();
        for name in value.split(',').map(str::trim) {
            if !is_identifier(name) || name == "exp" {
                return Err(e.error(off, format!("`{name}` is not a valid coordinate name")));
            }
            if list.iter().any(|x| x == name) {
                return Err(e.error(off, format!("coordinate `{name}` repeats")));
            }
            list.push(name.to_string());
        }
        coordinates = Some(list);
    }
    let Some(coordinates) = coordinates else {
        return Err(ParseError { line: vars.line, column: 1, message: "`variables` needs `coordinates = ...`".into() });
    };
    let names = Names {
        momenta: coordinates.iter().map(|q| format!("p_{q}")).collect(),
        velocities: coordinates.iter().map(|q| velocity_symbol(q)).collect(),
        coordinates: coordinates.clone(),
    };
    let all: BTreeSet<&String> = names.coordinates.iter().chain(&names.momenta).chain(&names.velocities).collect();
    if all.len() != 3 * coordinates.len() {
        return Err(ParseError {
            line: vars.line,
            column: 1,
            message: "coordinate names collide with generated momentum or velocity names".into(),
        });
    }
    let phase = |v: &str| names.phase(v);

    let source = match (find("lagrangian"), find("hamiltonian")) {
        (Some(_), Some(h)) => {
            return Err(ParseError {
                line: h.line,
                column: 1,
                message: "give either `lagrangian` or `hamiltonian`, not both".into(),
            })
        }
        (None, None) => {
            return Err(ParseError {
                line: vars.line,
                column: 1,
                message: "missing `lagrangian` or `hamiltonian` section".into(),
            })
        }
        (Some(s), None) => {
            let mut l = None;
            for e in &s.entries {
                let (key, value, off) = e.key_value()?;
                if key != "L" || l.is_some() {
                    return Err(e.error(0, "`lagrangian` takes a single `L = ...` entry"));
                }
                l = Some(expression(e, value, off, &|v| names.lagrangian(v))?);
            }
            Source::Lagrangian(l.ok_or(ParseError {
                line: s.line,
                column: 1,
                message: "`lagrangian` needs `L = ...`".into(),
            })?)
        }
        (None, Some(s)) => {
            let mut h = None;
            let mut primaries = Vec::new();
            for e in &s.entries {
                let (key, value, off) = e.key_value()?;
                match key {
                    "H" if h.is_none() => h = Some(expression(e, value, off, &phase)?),
                    "primary" => primaries.push(expression(e, value, off, &phase)?),
                    _ => return Err(e.error(0, format!("unexpected `{key}` in `hamiltonian` (H, primary)"))),
                }
            }
            let h = h.ok_or(ParseError { line: s.line, column: 1, message: "`hamiltonian` needs `H = ...`".into() })?;
            Source::Hamiltonian { h, primaries }
        }
    };

    let mut gauge = Vec::new();
    if let Some(s) = find("gauge") {
        for e in &s.entries {
            gauge.push(expression(e, e.text, 0, &phase)?);
        }
    }

    let mut roots = Vec::new();
    if let Some(s) = find("roots") {
        for e in &s.entries {
            let Some(arrow) = e.text.find("->") else {
                return Err(e.error(0, "expected `constraint -> root, ...`"));
            };
            let c = expression(e, &e.text[..arrow], 0, &phase)?;
            let mut rs = Vec::new();
            let mut offset = arrow + 2;
            for part in e.text[arrow + 2..].split(',') {
                rs.push(expression(e, part, offset, &phase)?);
                offset += part.len() + 1;
            }
            roots.push((c, rs));
        }
    }

    let policy = match find("policy") {
        None => None,
        Some(s) => {
            let mut p = MultiplierPolicy::default();
            for e in &s.entries {
                let (key, value, off) = e.key_value()?;
                let f = parse_multiplier_fn(value).map_err(|m| e.error(off, m))?;
                if key == "default" {
                    if p.default.replace(f).is_some() {
                        return Err(e.error(0, "duplicate `default`"));
                    }
                } else if !is_identifier(key) || phase(key) {
                    return Err(e.error(0, format!("`{key}` is not a multiplier symbol")));
                } else if p.per_symbol.insert(key.to_string(), f).is_some() {
                    return Err(e.error(0, format!("duplicate policy for `{key}`")));
                }
            }
            Some(p)
        }
    };

    let integrate = match find("integrate") {
        None => None,
        Some(s) => {
            let mut c = IntegrateConfig::default();
            for e in &s.entries {
                let (key, value, off) = e.key_value()?;
                let at = |m: String| e.error(off, m);
                match key {
                    "hamiltonian" => c.hamiltonian = value.parse().map_err(at)?,
                    "t0" => c.t0 = number(value, "t0").map_err(at)?,
                    "h" => {
                        c.h = number(value, "h").map_err(at)?;
                        if c.h <= 0.0 {
                            return Err(e.error(off, "step `h` must be positive"));
                        }
                    }
                    "steps" => c.steps = count(value, "steps").map_err(at)?,
                    _ => {
                        let Some(var) = key.strip_suffix("(0)") else {
                            return Err(e.error(0, format!("unknown key `{key}` in `integrate`")));
                        };
                        if !phase(var) {
                            return Err(e.error(0, format!("undeclared variable `{var}`")));
                        }
                        if c.initial.iter().any(|(v, _)| v == var) {
                            return Err(e.error(0, format!("duplicate initial value for `{var}`")));
                        }
                        c.initial.push((var.to_string(), number(value, "an initial value").map_err(at)?));
                    }
                }
            }
            Some(c)
        }
    };

    let quantum = match find("quantum") {
        None => None,
        Some(s) => {
            let mut q = QuantumConfig::default();
            for e in &s.entries {
                let (key, value, off) = e.key_value()?;
                let at = |m: String| e.error(off, m);
                match key {
                    "axis" => {
                        let mut parts = value.split(',').map(str::trim);
                        let var = parts.next().unwrap_or("");
                        if !phase(var) {
                            return Err(e.error(off, format!("undeclared variable `{var}`")));
                        }
                        let mut axis = AxisConfig { variable: var.to_string(), length: 20.0, points: 128 };
                        for p in parts {
                            match p.split_once('=').map(|(k, v)| (k.trim(), v)) {
                                Some(("length", v)) => axis.length = number(v, "length").map_err(at)?,
                                Some(("points", v)) => axis.points = count(v, "points").map_err(at)?,
                                _ => return Err(e.error(off, format!("unknown axis option `{p}` (length, points)"))),
                            }
                        }
                        q.axes.push(axis);
                    }
                    "hbar" => q.hbar = number(value, "hbar").map_err(at)?,
                    "dt" => q.dt = Some(number(value, "dt").map_err(at)?),
                    "steps" => q.steps = count(value, "steps").map_err(at)?,
                    "record" => q.record_every = count(value, "record").map_err(at)?.max(1),
                    "ordering" => q.ordering = value.parse().map_err(at)?,
                    "condition" => q.conditions.push(expression(e, value, off, &phase)?),
                    "initial" => {
                        let (name, args) = split_call(value).map_err(at)?;
                        q.initial = match name {
                            "constant" if args.is_empty() => InitialState::Constant,
                            "gaussian" => {
                                let mut g = (0.0, 1.0, 0.0);
                                for (k, v) in args {
                                    match k {
                                        "center" => g.0 = number(v, "center").map_err(at)?,
                                        "width" => g.1 = number(v, "width").map_err(at)?,
                                        "momentum" => g.2 = number(v, "momentum").map_err(at)?,
                                        _ => return Err(e.error(off, format!("unknown gaussian option `{k}`"))),
                                    }
                                }
                                InitialState::Gaussian { center: g.0, width: g.1, momentum: g.2 }
                            }
                            _ => return Err(e.error(off, "initial state is `constant` or `gaussian(...)`")),
                        };
                    }
                    _ => return Err(e.error(0, format!("unknown key `{key}` in `quantum`"))),
                }
            }
            Some(q)
        }
    };

    Ok(SystemFile { name, coordinates, source, gauge, roots, policy, integrate, quantum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    const A: &str = "\
system: counterexample-a
variables:
  coordinates = x, y
lagrangian:
  L = 1/2*exp(y)*x_dot^2
gauge: y - 2*x
roots:
  1/2*exp(-y)*p_x^2 -> p_x
policy:
  mu = random(seed=1, amplitude=1, cutoff=2)
  default = zero
integrate:
  hamiltonian = total
  h = 1e-3
  steps = 100
  x(0) = 1
quantum:
  axis = x, length=20, points=64
  ordering = sandwich
  condition = p_x
";

    #[test]
    fn parses_a_full_file() {
        let f = parse(A).unwrap();
        assert_eq!(f.name.as_deref(), Some("counterexample-a"));
        assert_eq!(f.gauge, vec![parse_expr("y - 2*x").unwrap()]);
        assert_eq!(f.roots[0].1, vec![parse_expr("p_x").unwrap()]);
        let p = f.policy.as_ref().unwrap();
        assert_eq!(p.get("mu"), Some(&MultiplierFn::random(1, 1.0, 2.0)));
        assert_eq!(p.get("lambda"), Some(&MultiplierFn::Zero));
        let c = f.integrate.as_ref().unwrap();
        assert_eq!((c.hamiltonian, c.h, c.steps), (HamiltonianKind::Total, 1e-3, 100));
        assert_eq!(c.initial, vec![("x".to_string(), 1.0)]);
        let q = f.quantum.as_ref().unwrap();
        assert_eq!(q.axes, vec![AxisConfig { variable: "x".into(), length: 20.0, points: 64 }]);
        assert_eq!(q.ordering, OrderingRule::Sandwich);
        let sys = f.to_system().unwrap();
        assert_eq!(sys.primaries, vec![parse_expr("p_y").unwrap()]);
        assert_eq!(sys.gauge_conditions.len(), 1);
    }

    #[test]
    fn round_trips() {
        let f = parse(A).unwrap();
        assert_eq!(parse(&f.to_text()).unwrap(), f);
        let h = "variables:\n  coordinates = x, y\nhamiltonian:\n  H = 1/2*p_x^2\n  primary = p_y\n";
        let f = parse(h).unwrap();
        assert_eq!(parse(&f.to_text()).unwrap(), f);
        let sys = f.to_system().unwrap();
        assert_eq!(sys.multipliers, vec!["mu".to_string()]);
    }

    #[test]
    fn undeclared_variable_is_located() {
        let text = "variables:\n  coordinates = x, y\nhamiltonian:\n  H = p_x^2 + w\n";
        let e = parse(text).unwrap_err();
        assert_eq!((e.line, e.column), (4, 15));
        assert!(e.message.contains("`w`"), "{}", e.message);
        let text = "variables:\n  coordinates = x\nlagrangian:\n  L = 1/2*x_dot^2\ngauge: x + p_y\n";
        let e = parse(text).unwrap_err();
        assert_eq!((e.line, e.column), (5, 12));
        let text = "variables:\n  coordinates = x\nlagrangian:\n  L = 1/2*x_dot^2\nroots:\n  x^2 -> x, q\n";
        let e = parse(text).unwrap_err();
        assert_eq!((e.line, e.column), (6, 13));
    }

    #[test]
    fn structural_errors() {
        let bad = [
            ("variables:\n  coordinates = x\nvariables:\n  coordinates = y\n", 3, "duplicate section"),
            ("variables:\n  coordinates = x\n", 1, "missing `lagrangian`"),
            ("  L = x\n", 1, "outside of any section"),
            ("bogus:\n", 1, "unknown section"),
            ("variables:\n  coordinates = x\nlagrangian:\n  L = x_dot^2\nhamiltonian:\n  H = p_x\n", 5, "not both"),
            ("variables:\n  coordinates = x\nlagrangian:\n  L = x_dot^2\npolicy:\n  mu = wobble\n", 6, "unknown multiplier"),
            ("variables:\n  coordinates = x\nlagrangian:\n  L = x_dot^2\nintegrate:\n  w(0) = 1\n", 6, "undeclared"),
            ("variables:\n  coordinates = x\nlagrangian:\n  L = x_dot^2 +\n", 4, "expected"),
            ("variables:\n  coordinates = x, x\n", 2, "repeats"),
        ];
        for (text, line, msg) in bad {
            let e = parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
            assert!(e.message.contains(msg), "{text}: {e}");
        }
    }

    #[test]
    fn multiplier_functions() {
        assert_eq!(parse_multiplier_fn("zero"), Ok(MultiplierFn::Zero));
        assert_eq!(parse_multiplier_fn("constant(0.5)"), Ok(MultiplierFn::Constant { value: 0.5 }));
        assert_eq!(parse_multiplier_fn("random(seed=4)"), Ok(MultiplierFn::random(4, 1.0, 2.0)));
        let t = parse_multiplier_fn("table(t0=0, dt=0.5, values=0 1 -2)").unwrap();
        assert_eq!(t, MultiplierFn::Tabulated { t0: 0.0, dt: 0.5, values: vec![0.0, 1.0, -2.0] });
        assert_eq!(parse_multiplier_fn(&multiplier_fn_text(&t)), Ok(t));
        assert!(parse_multiplier_fn("random(seed=1, colour=2)").is_err());
        assert!(parse_multiplier_fn("random(amplitude=2)").is_err());
        assert!(parse_multiplier_fn("table(dt=0, values=1)").is_err());
    }
}
