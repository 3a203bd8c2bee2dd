//! Periodic-grid Schrödinger evolution of gauge-fixed Hamiltonians.
//!
//! Each axis carries one variable of a canonical pair as a multiplicative
//! coordinate; its partner becomes `∓iħ` times the periodic central
//! difference along that axis (minus for a coordinate axis, plus for a
//! momentum axis). Constraints are imposed as kernel conditions on the
//! initial state.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use serde::Serialize;

use crate::symbolic::{PhaseExpr, PhaseSpace, SymbolicError, VarKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("unsupported operator: {0}")]
    Unsupported(String),
    #[error("no physical state: {0}")]
    NoPhysicalState(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// One grid direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    /// Variable sampled on the grid.
    pub variable: String,
    /// Its canonical partner, represented by a difference operator.
    pub derivative: String,
    pub length: f64,
    pub points: usize,
    /// `-1` when `variable` is a coordinate, `+1` when it is a momentum.
    pub sign: f64,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representation {
    pub axes: Vec<Axis>,
    pub hbar: f64,
}

impl Representation {
    /// Axes given as `(grid variable, box length, points)`, one per canonical
    /// pair of `space`.
    pub fn new(space: &PhaseSpace, axes: &[(&str, f64, usize)], hbar: f64) -> Result<Self, QuantumError> {
        let bad = |m: String| Err(QuantumError::InvalidRepresentation(m));
        if !(hbar > 0.0 && hbar.is_finite()) {
            return bad(format!("hbar must be positive, got {hbar}"));
        }
        let mut out = Vec::with_capacity(axes.len());
        for &(name, length, points) in axes {
            let Some(v) = space.get(name) else {
                return bad(format!("`{name}` is not a variable of the system"));
            };
            let Some(conj) = v.conjugate.clone() else {
                return bad(format!("`{name}` has no canonical partner"));
            };
            if points < 8 {
                return bad(format!("axis `{name}` needs at least 8 points, got {points}"));
            }
            if !(length > 0.0 && length.is_finite()) {
                return bad(format!("axis `{name}` needs a positive length"));
            }
            let sign = if v.kind == VarKind::Coordinate { -1.0 } else { 1.0 };
            out.push(Axis { variable: name.to_string(), derivative: conj, length, points, sign });
        }
        for (q, p) in space.pairs() {
            let n = out
                .iter()
                .filter(|a| a.variable == q || a.variable == p)
                .count();
            if n != 1 {
                return bad(format!("pair ({q}, {p}) needs exactly one axis, has {n}"));
            }
        }
        Ok(Representation { axes: out, hbar })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Volume element of the grid-weighted inner product.
    pub fn cell(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes.len()];
        for k in (0..self.axes.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].points;
        }
        s
    }

    /// Grid indices of flat index `i`, first axis slowest.
    pub fn indices(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            out[k] = i % self.axes[k].points;
            i /= self.axes[k].points;
        }
        out
    }

    fn axis_of(&self, name: &str) -> Option<(usize, bool)> {
        self.axes.iter().enumerate().find_map(|(k, a)| {
            if a.variable == name {
                Some((k, false))
            } else if a.derivative == name {
                Some((k, true))
            } else {
                None
            }
        })
    }

    fn restricted(&self, k: usize) -> Representation {
        Representation { axes: vec![self.axes[k].clone()], hbar: self.hbar }
    }
}

/// How products of multiplicative factors `M` and difference operators `K`
/// are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingRule {
    /// `½(MK + KM)`.
    SymmetricHalf,
    /// `MK`.
    Left,
    /// `KM`.
    Right,
    /// `½(A M B + B M A)` for `K = AB`, and `½(MK + KM)` for first-order `K`.
    /// Annihilates every state killed by the difference operators.
    Sandwich,
}

impl std::str::FromStr for OrderingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symmetric-half" => Ok(OrderingRule::SymmetricHalf),
            "left" => Ok(OrderingRule::Left),
            "right" => Ok(OrderingRule::Right),
            "sandwich" => Ok(OrderingRule::Sandwich),
            other => Err(format!(
                "unknown ordering `{other}` (symmetric-half, left, right, sandwich)"
            )),
        }
    }
}

impl std::fmt::Display for OrderingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrderingRule::SymmetricHalf => "symmetric-half",
            OrderingRule::Left => "left",
            OrderingRule::Right => "right",
            OrderingRule::Sandwich => "sandwich",
        })
    }
}

/// Sparse operator on the flattened grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub matrix: CsrMatrix<Complex64>,
}

impl GridOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    pub fn adjoint(&self) -> GridOperator {
        let mut t = self.matrix.transpose();
        for v in t.values_mut() {
            *v = v.conj();
        }
        GridOperator { matrix: t }
    }

    /// Induced ∞-norm: largest absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.values().iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H_ij − conj(H_ji)| / max |H|`; zero for the zero operator.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = &self.matrix - &self.adjoint().matrix;
        let d = diff.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            d / scale
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.matrix.nrows(), self.matrix.ncols());
        for (i, j, v) in self.matrix.triplet_iter() {
            m[(i, j)] += *v;
        }
        m
    }
}

fn diagonal(values: &[Complex64]) -> CsrMatrix<Complex64> {
    let n = values.len();
    let mut coo = CooMatrix::new(n, n);
    for (i, v) in values.iter().enumerate() {
        if *v != Complex64::new(0.0, 0.0) {
            coo.push(i, i, *v);
        }
    }
    CsrMatrix::from(&coo)
}

/// `∓iħ·D_k` along axis `k`, with `D` the periodic central difference.
fn difference(rep: &Representation, k: usize) -> CsrMatrix<Complex64> {
    let n = rep.size();
    let axis = &rep.axes[k];
    let stride = rep.strides()[k];
    let w = Complex64::new(0.0, axis.sign * rep.hbar / (2.0 * axis.spacing()));
    let mut coo = CooMatrix::new(n, n);
    for i in 0..n {
        let j = (i / stride) % axis.points;
        let base = i - j * stride;
        let up = base + ((j + 1) % axis.points) * stride;
        let down = base + ((j + axis.points - 1) % axis.points) * stride;
        coo.push(i, up, w);
        coo.push(i, down, -w);
    }
    CsrMatrix::from(&coo)
}

/// Split `h` into `Σ_K M_K · K` with `K` a monomial in the difference-operator
/// variables.
fn split_terms(h: &PhaseExpr, rep: &Representation) -> Result<BTreeMap<Vec<usize>, PhaseExpr>, QuantumError> {
    let mut out: BTreeMap<Vec<usize>, PhaseExpr> = BTreeMap::new();
    for (key, c) in h.terms() {
        let mut ops = Vec::new();
        let mut factor = PhaseExpr::constant(c.clone());
        for (v, k) in key.monomial.iter() {
            match rep.axis_of(v) {
                Some((axis, true)) => ops.extend(std::iter::repeat_n(axis, k as usize)),
                Some((_, false)) => factor = factor * PhaseExpr::var(v).pow(k),
                None => {
                    return Err(QuantumError::Unsupported(format!("`{v}` has no place on the grid")));
                }
            }
        }
        for (v, _) in key.exp.iter() {
            match rep.axis_of(v) {
                Some((_, false)) => {}
                Some((_, true)) => {
                    return Err(QuantumError::Unsupported(format!("`{v}` appears inside an exponential")));
                }
                None => return Err(QuantumError::Unsupported(format!("`{v}` has no place on the grid"))),
            }
        }
        if ops.len() > 2 {
            return Err(QuantumError::Unsupported(format!(
                "term of degree {} in the difference-operator variables",
                ops.len()
            )));
        }
        if !key.exp.is_trivial() {
            let mut lin = PhaseExpr::constant(key.exp.constant().clone());
            for (v, r) in key.exp.iter() {
                lin = lin + PhaseExpr::var(v).scale(r);
            }
            factor = factor * PhaseExpr::exp(&lin)?;
        }
        let entry = out.entry(ops).or_insert_with(PhaseExpr::zero);
        *entry = &*entry + &factor;
    }
    Ok(out)
}

fn sample(f: &PhaseExpr, rep: &Representation) -> Result<Vec<Complex64>, QuantumError> {
    (0..rep.size())
        .map(|i| {
            let idx = rep.indices(i);
            let v = f.eval_with(|name| {
                rep.axes
                    .iter()
                    .zip(&idx)
                    .find(|(a, _)| a.variable == name)
                    .map(|(a, &j)| a.coordinate(j))
            })?;
            Ok(Complex64::new(v, 0.0))
        })
        .collect()
}

/// Grid operator of a phase-space function.
pub fn build_operator(h: &PhaseExpr, rep: &Representation, rule: OrderingRule) -> Result<GridOperator, QuantumError> {
    let n = rep.size();
    let diffs: Vec<CsrMatrix<Complex64>> = (0..rep.axes.len()).map(|k| difference(rep, k)).collect();
    let half = Complex64::new(0.5, 0.0);
    let mut total = CsrMatrix::zeros(n, n);
    for (ops, factor) in split_terms(h, rep)? {
        if factor.is_zero() {
            continue;
        }
        let m = diagonal(&sample(&factor, rep)?);
        let term = match ops.as_slice() {
            [] => m,
            [a] => match rule {
                OrderingRule::Left => &m * &diffs[*a],
                OrderingRule::Right => &diffs[*a] * &m,
                OrderingRule::SymmetricHalf | OrderingRule::Sandwich => {
                    (&(&m * &diffs[*a]) + &(&diffs[*a] * &m)) * half
                }
            },
            [a, b] => {
                let k = &diffs[*a] * &diffs[*b];
                match rule {
                    OrderingRule::Left => &m * &k,
                    OrderingRule::Right => &k * &m,
                    OrderingRule::SymmetricHalf => (&(&m * &k) + &(&k * &m)) * half,
                    OrderingRule::Sandwich => {
                        let amb = &(&diffs[*a] * &m) * &diffs[*b];
                        let bma = &(&diffs[*b] * &m) * &diffs[*a];
                        (&amb + &bma) * half
                    }
                }
            }
            _ => unreachable!("degree checked in split_terms"),
        };
        total = &total + &term;
    }
    Ok(GridOperator { matrix: total })
}

/// Complex amplitudes on the flattened grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub amplitudes: DVector<Complex64>,
    pub time: f64,
}

impl WaveState {
    pub fn new(amplitudes: DVector<Complex64>) -> Self {
        WaveState { amplitudes, time: 0.0 }
    }

    /// Samples a complex function of the grid coordinates.
    pub fn from_fn(rep: &Representation, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let amps = (0..rep.size())
            .map(|i| {
                let x: Vec<f64> = rep
                    .indices(i)
                    .iter()
                    .zip(&rep.axes)
                    .map(|(&j, a)| a.coordinate(j))
                    .collect();
                f(&x)
            })
            .collect::<Vec<_>>();
        WaveState::new(DVector::from_vec(amps))
    }

    pub fn norm(&self, rep: &Representation) -> f64 {
        (self.amplitudes.norm_squared() * rep.cell()).sqrt()
    }

    pub fn normalized(mut self, rep: &Representation) -> Self {
        let n = self.norm(rep);
        self.amplitudes /= Complex64::new(n, 0.0);
        self
    }

    /// Coordinates and `(re, im)` columns with 17 significant digits.
    pub fn to_csv(&self, rep: &Representation) -> String {
        let mut out = String::new();
        for a in &rep.axes {
            out.push_str(&a.variable);
            out.push(',');
        }
        out.push_str("re,im\n");
        for (i, v) in self.amplitudes.iter().enumerate() {
            for (&j, a) in rep.indices(i).iter().zip(&rep.axes) {
                let _ = write!(out, "{:.16e},", a.coordinate(j));
            }
            let _ = writeln!(out, "{:.16e},{:.16e}", v.re, v.im);
        }
        out
    }
}

/// Apply a dense `n_k × n_k` matrix along axis `k` of the flattened grid.
fn apply_along_axis(rep: &Representation, k: usize, m: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let stride = rep.strides()[k];
    let nk = rep.axes[k].points;
    let mut out = DVector::zeros(psi.len());
    for i in 0..psi.len() {
        let j = (i / stride) % nk;
        if j != 0 {
            continue;
        }
        let fiber: DVector<Complex64> = DVector::from_iterator(nk, (0..nk).map(|t| psi[i + t * stride]));
        let image = m * fiber;
        for t in 0..nk {
            out[i + t * stride] = image[t];
        }
    }
    out
}

/// Orthonormal kernel basis (columns) of the conditions restricted to one axis.
fn axis_kernel(rep: &Representation, k: usize, conditions: &[&PhaseExpr]) -> Result<DMatrix<Complex64>, QuantumError> {
    let axis = &rep.axes[k];
    let n = axis.points;
    let pure_derivative = |c: &PhaseExpr| {
        c.term_count() == 1 && c.polynomial_degree_in(&axis.derivative) == Some(1) && c.variables().len() == 1
    };
    if conditions.iter().all(|c| pure_derivative(c)) {
        // periodic central differences annihilate exactly the constant and
        // the alternating vector (the latter only for an even point count)
        let mut cols = vec![DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0))];
        if n.is_multiple_of(2) {
            cols.push(DVector::from_fn(n, |j, _| {
                Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).sqrt(), 0.0)
            }));
        }
        return Ok(DMatrix::from_columns(&cols));
    }
    let sub = rep.restricted(k);
    let mut gram = DMatrix::<Complex64>::zeros(n, n);
    for c in conditions {
        let op = build_operator(c, &sub, OrderingRule::SymmetricHalf)?.to_dense();
        gram += op.adjoint() * &op;
    }
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = (1e-10 * top.sqrt()).powi(2);
    let cols: Vec<DVector<Complex64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= cut)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        return Err(QuantumError::NoPhysicalState(format!(
            "conditions on axis `{}` have no common kernel on the grid",
            axis.variable
        )));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Normalized projection of `seed` (default: the constant state) onto the
/// joint kernel of first-order conditions, each acting along a single axis.
pub fn prepare_initial(
    rep: &Representation,
    conditions: &[PhaseExpr],
    seed: Option<&WaveState>,
) -> Result<WaveState, QuantumError> {
    let mut by_axis: BTreeMap<usize, Vec<&PhaseExpr>> = BTreeMap::new();
    for c in conditions {
        let axes: std::collections::BTreeSet<usize> = c
            .variables()
            .iter()
            .map(|v| {
                rep.axis_of(v)
                    .map(|(k, _)| k)
                    .ok_or_else(|| QuantumError::Unsupported(format!("`{v}` has no place on the grid")))
            })
            .collect::<Result<_, _>>()?;
        if axes.len() != 1 {
            return Err(QuantumError::Unsupported(format!(
                "condition `{c}` must act along exactly one axis"
            )));
        }
        by_axis.entry(*axes.iter().next().unwrap()).or_default().push(c);
    }
    let mut psi = match seed {
        Some(s) => s.amplitudes.clone(),
        None => DVector::from_element(rep.size(), Complex64::new(1.0, 0.0)),
    };
    let seed_norm = psi.norm();
    for (k, conds) in by_axis {
        let basis = axis_kernel(rep, k, &conds)?;
        let projector = &basis * basis.adjoint();
        psi = apply_along_axis(rep, k, &projector, &psi);
    }
    if psi.norm() <= 1e-12 * seed_norm {
        return Err(QuantumError::NoPhysicalState("seed state is orthogonal to the kernel".into()));
    }
    Ok(WaveState::new(psi).normalized(rep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    /// Keep every n-th state (and the final one) in the trace.
    pub record_every: Option<usize>,
    pub tolerance: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64, steps: usize) -> Self {
        EvolveOptions { dt, steps, record_every: None, tolerance: 1e-14 }
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = Some(every.max(1));
        self
    }

    /// `1e-3 · h²` for the finest axis.
    pub fn default_dt(rep: &Representation) -> f64 {
        let h = rep.axes.iter().map(Axis::spacing).fold(f64::INFINITY, f64::min);
        1e-3 * h * h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub state: WaveState,
    pub trace: Vec<WaveState>,
    /// Largest change of the norm in one step.
    pub max_step_norm_change: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
}

/// Stops once the normwise backward error `‖r‖ / (‖A‖‖x‖ + ‖b‖)` is below
/// `tol`; `anorm` bounds `‖A‖` in the 2-norm.
fn bicgstab(
    apply: impl Fn(&DVector<Complex64>) -> DVector<Complex64>,
    anorm: f64,
    b: &DVector<Complex64>,
    x0: DVector<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<Complex64>, QuantumError> {
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(DVector::zeros(b.len()));
    }
    let mut x = x0;
    let mut r = b - apply(&x);
    let converged = |r: &DVector<Complex64>, x: &DVector<Complex64>| r.norm() <= tol * (anorm * x.norm() + bnorm);
    if converged(&r, &x) {
        return Ok(x);
    }
    let r_hat = r.clone();
    let one = Complex64::new(1.0, 0.0);
    let (mut rho, mut alpha, mut omega) = (one, one, one);
    let mut v = DVector::zeros(b.len());
    let mut p = DVector::zeros(b.len());
    for _ in 0..max_iter {
        let rho_new = r_hat.dotc(&r);
        if rho_new.norm() == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        p = &r + (&p - &v * omega) * beta;
        v = apply(&p);
        alpha = rho_new / r_hat.dotc(&v);
        let s = &r - &v * alpha;
        let half = &x + &p * alpha;
        if converged(&s, &half) {
            return Ok(half);
        }
        let t = apply(&s);
        let tt = t.dotc(&t);
        if tt.norm() == 0.0 {
            break;
        }
        omega = t.dotc(&s) / tt;
        x += &p * alpha + &s * omega;
        r = &s - &t * omega;
        if converged(&r, &x) {
            return Ok(x);
        }
        rho = rho_new;
    }
    Err(QuantumError::NumericalBreakdown(format!(
        "Crank–Nicolson solve did not reach backward error {tol:e}"
    )))
}

/// Crank–Nicolson: `(1 + iτH) ψ' = (1 − iτH) ψ` with `τ = dt / 2ħ`.
pub fn evolve(
    op: &GridOperator,
    rep: &Representation,
    psi0: &WaveState,
    opts: EvolveOptions,
) -> Result<Evolution, QuantumError> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(QuantumError::NumericalBreakdown(format!("time step {} must be positive", opts.dt)));
    }
    if op.dim() != psi0.amplitudes.len() {
        return Err(QuantumError::InvalidRepresentation("state and operator sizes differ".into()));
    }
    let tau = Complex64::new(0.0, opts.dt / (2.0 * rep.hbar));
    let mut psi = psi0.amplitudes.clone();
    let initial_norm = psi0.norm(rep);
    let mut prev_norm = initial_norm;
    let mut max_change: f64 = 0.0;
    let mut trace = Vec::new();
    if opts.record_every.is_some() {
        trace.push(psi0.clone());
    }
    // Hermitian H: ‖1 + iτH‖₂ ≤ 1 + |τ|‖H‖∞.
    let anorm = 1.0 + tau.norm() * op.row_sum_norm();
    for step in 1..=opts.steps {
        let hpsi = op.apply(&psi);
        let rhs = &psi - &hpsi * tau;
        psi = bicgstab(|v| v + op.apply(v) * tau, anorm, &rhs, psi.clone(), opts.tolerance, 2000)?;
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NumericalBreakdown(format!("non-finite amplitude at step {step}")));
        }
        let n = (psi.norm_squared() * rep.cell()).sqrt();
        max_change = max_change.max((n - prev_norm).abs());
        prev_norm = n;
        if let Some(every) = opts.record_every {
            if step % every == 0 || step == opts.steps {
                trace.push(WaveState { amplitudes: psi.clone(), time: psi0.time + step as f64 * opts.dt });
            }
        }
    }
    Ok(Evolution {
        state: WaveState { amplitudes: psi, time: psi0.time + opts.steps as f64 * opts.dt },
        trace,
        max_step_norm_change: max_change,
        initial_norm,
        final_norm: prev_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub energy: f64,
    /// Imaginary part of `⟨ψ|H|ψ⟩/⟨ψ|ψ⟩`; rounding-level for Hermitian `H`.
    pub energy_imag: f64,
    pub norm: f64,
    pub defect: Option<f64>,
}

/// Energy, norm and the relative distance to an optional reference state.
pub fn observables(
    op: &GridOperator,
    rep: &Representation,
    psi: &WaveState,
    reference: Option<&WaveState>,
) -> Observables {
    let a = &psi.amplitudes;
    let e = a.dotc(&op.apply(a)) / a.dotc(a);
    Observables {
        energy: e.re,
        energy_imag: e.im,
        norm: psi.norm(rep),
        defect: reference.map(|r| distance(rep, psi, r) / r.norm(rep)),
    }
}

/// Grid-weighted `‖a − b‖`.
pub fn distance(rep: &Representation, a: &WaveState, b: &WaveState) -> f64 {
    ((&a.amplitudes - &b.amplitudes).norm_squared() * rep.cell()).sqrt()
}

/// Grid-weighted `‖Cψ‖`.
pub fn residual_norm(op: &GridOperator, rep: &Representation, psi: &WaveState) -> f64 {
    (op.apply(&psi.amplitudes).norm_squared() * rep.cell()).sqrt()
}

#[cfg(test)]
mod tests;
