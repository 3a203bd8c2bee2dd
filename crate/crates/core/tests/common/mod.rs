#![allow(dead_code)]

use dirac_core::constraints::{legendre, LagrangianDef, SystemDef};
use dirac_core::symbolic::{parse_expr, rat, Monomial, PhaseExpr, PhasePoint, PhaseSpace};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const VARS: [&str; 4] = ["x", "p_x", "y", "p_y"];

pub fn e(s: &str) -> PhaseExpr {
    parse_expr(s).unwrap()
}

pub fn space() -> PhaseSpace {
    PhaseSpace::canonical(&["x", "y"])
}

pub fn system_a() -> SystemDef {
    legendre(&LagrangianDef::new(&["x", "y"], e("1/2*exp(y)*x_dot^2")))
        .unwrap()
        .with_roots(e("1/2*exp(-y)*p_x^2"), vec![e("p_x")])
}

pub fn cawley() -> SystemDef {
    legendre(&LagrangianDef::new(&["x", "y", "z"], e("x_dot*z_dot + 1/2*y*z^2")))
        .unwrap()
        .with_roots(e("1/2*z^2"), vec![e("z")])
        .with_roots(e("z*p_x"), vec![e("p_x")])
}

fn term() -> impl Strategy<Value = PhaseExpr> {
    (
        -4i64..=4,
        1i64..=3,
        prop::collection::vec(0u32..=2, 4),
        prop::option::weighted(0.3, (-1i64..=1, -1i64..=1)),
    )
        .prop_map(|(n, d, powers, exp)| {
            let mut m = PhaseExpr::constant(rat(n, d));
            for (v, k) in VARS.iter().zip(powers) {
                if k > 0 {
                    m = m * PhaseExpr::monomial(rat(1, 1), Monomial::var(v, k));
                }
            }
            if let Some((a, b)) = exp {
                let lin = PhaseExpr::int(a) * PhaseExpr::var("x") + PhaseExpr::int(b) * PhaseExpr::var("y");
                m = m * PhaseExpr::exp(&lin).unwrap();
            }
            m
        })
}

/// Sums of up to four terms: polynomials of degree ≤ 2 per variable, some
/// terms carrying `exp(a·x + b·y)`.
pub fn expr() -> impl Strategy<Value = PhaseExpr> {
    prop::collection::vec(term(), 1..=4).prop_map(|ts| ts.into_iter().fold(PhaseExpr::zero(), |acc, t| acc + t))
}

pub fn point() -> impl Strategy<Value = PhasePoint> {
    prop::collection::vec(-1.0f64..1.0, 4)
        .prop_map(|v| VARS.iter().zip(v).map(|(n, x)| (*n, x)).collect())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn check_antisymmetry(f: &PhaseExpr, g: &PhaseExpr) -> Result<(), TestCaseError> {
    let s = space();
    let sum = s.poisson(f, g).unwrap() + s.poisson(g, f).unwrap();
    ensure(sum.is_zero(), || format!("{{f,g}} + {{g,f}} = {sum}"))
}

pub fn check_leibniz(f: &PhaseExpr, g: &PhaseExpr, h: &PhaseExpr) -> Result<(), TestCaseError> {
    let s = space();
    let lhs = s.poisson(f, &(g * h)).unwrap();
    let rhs = &s.poisson(f, g).unwrap() * h + g * &s.poisson(f, h).unwrap();
    let diff = lhs - rhs;
    ensure(diff.is_zero(), || format!("Leibniz residual {diff}"))
}

pub fn check_jacobi(f: &PhaseExpr, g: &PhaseExpr, h: &PhaseExpr, pt: &PhasePoint) -> Result<(), TestCaseError> {
    let s = space();
    let b = |u: &PhaseExpr, v: &PhaseExpr| s.poisson(u, v).unwrap();
    let terms = [b(f, &b(g, h)), b(g, &b(h, f)), b(h, &b(f, g))];
    let vals: Vec<f64> = terms.iter().map(|t| t.evaluate(pt).unwrap()).collect();
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let total: f64 = vals.iter().sum();
    ensure(total.abs() < 1e-9 * scale, || format!("Jacobi sum {total:e} at scale {scale:e}"))
}

/// Symbolic partial derivative against a central difference.
pub fn check_derivative(f: &PhaseExpr, pt: &PhasePoint, var: usize) -> Result<(), TestCaseError> {
    let name = VARS[var % VARS.len()];
    let exact = f.diff(name).evaluate(pt).unwrap();
    let step = 1e-5;
    let x0 = pt.get(name).unwrap();
    let shifted = |d: f64| {
        let mut p = pt.clone();
        p.set(name, x0 + d);
        f.evaluate(&p).unwrap()
    };
    let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
    let rel = (exact - fd).abs() / exact.abs().max(1.0);
    ensure(rel < 1e-6, || format!("d/d{name}: exact {exact:e}, finite difference {fd:e}"))
}

/// Printing a canonical form and parsing it back is the identity.
pub fn check_print_parse(f: &PhaseExpr) -> Result<(), TestCaseError> {
    let back = parse_expr(&f.to_string()).unwrap();
    ensure(&back == f, || format!("{f} reparsed as {back}"))
}
