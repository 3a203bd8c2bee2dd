//! Canonical phase-space expressions.
//!
//! A [`PhaseExpr`] is a finite sum of terms `c · Π vᵏ · exp(r₀ + Σ r_v·v)` with
//! exact rational `c`, `r₀`, `r_v`. Terms are kept in a `BTreeMap` keyed by the
//! monomial and the exponent form, so two expressions are equal exactly when
//! their term maps are equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SymbolicError;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Product of non-negative integer powers of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(name: &str, power: u32) -> Self {
        let mut m = BTreeMap::new();
        if power > 0 {
            m.insert(name.to_string(), power);
        }
        Monomial(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn power_of(&self, name: &str) -> u32 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, k) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += k;
        }
        Monomial(out)
    }

    fn without(&self, name: &str) -> Monomial {
        let mut out = self.0.clone();
        out.remove(name);
        Monomial(out)
    }

    fn with_power(&self, name: &str, power: u32) -> Monomial {
        let mut out = self.0.clone();
        if power == 0 {
            out.remove(name);
        } else {
            out.insert(name.to_string(), power);
        }
        Monomial(out)
    }
}

/// Exponent `r₀ + Σ r_v·v` of the exponential factor of a term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpForm {
    constant: Rational,
    linear: BTreeMap<String, Rational>,
}

impl ExpForm {
    pub fn is_trivial(&self) -> bool {
        self.constant.is_zero() && self.linear.is_empty()
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn coefficient_of(&self, name: &str) -> Rational {
        self.linear.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.linear.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn add(&self, other: &ExpForm) -> ExpForm {
        let mut linear = self.linear.clone();
        for (v, r) in &other.linear {
            let e = linear.entry(v.clone()).or_insert_with(Rational::zero);
            *e += r;
        }
        linear.retain(|_, r| !r.is_zero());
        ExpForm {
            constant: &self.constant + &other.constant,
            linear,
        }
    }

    fn negate(&self) -> ExpForm {
        ExpForm {
            constant: -self.constant.clone(),
            linear: self.linear.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    fn without(&self, name: &str) -> ExpForm {
        let mut out = self.clone();
        out.linear.remove(name);
        out
    }

    fn to_text(&self) -> String {
        let mut e = PhaseExpr::constant(self.constant.clone());
        for (v, r) in &self.linear {
            e = e + PhaseExpr::var(v).scale(r);
        }
        e.to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub monomial: Monomial,
    pub exp: ExpForm,
}

/// Exact phase-space expression in canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseExpr {
    terms: BTreeMap<TermKey, Rational>,
}

impl PhaseExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut e = Self::zero();
        e.push(TermKey::default(), c);
        e
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(Rational::one(), Monomial::var(name, 1))
    }

    pub fn monomial(c: Rational, m: Monomial) -> Self {
        let mut e = Self::zero();
        e.push(
            TermKey {
                monomial: m,
                exp: ExpForm::default(),
            },
            c,
        );
        e
    }

    /// `exp(linear)`; fails unless `linear` is affine in its variables.
    pub fn exp(linear: &PhaseExpr) -> Result<Self, SymbolicError> {
        let form = linear.to_exp_form()?;
        let mut e = Self::zero();
        e.push(
            TermKey {
                monomial: Monomial::one(),
                exp: form,
            },
            Rational::one(),
        );
        Ok(e)
    }

    fn push(&mut self, key: TermKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value when the expression has no variable dependence.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                (k.monomial.is_one() && k.exp.is_trivial()).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Single term with no polynomial part: `c · exp(…)`, invertible in the class.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().unwrap().monomial.is_one()
    }

    pub fn inverse_unit(&self) -> Option<PhaseExpr> {
        if !self.is_unit() {
            return None;
        }
        let (k, c) = self.terms.iter().next().unwrap();
        let mut e = Self::zero();
        e.push(
            TermKey {
                monomial: Monomial::one(),
                exp: k.exp.negate(),
            },
            c.recip(),
        );
        Some(e)
    }

    pub fn scale(&self, s: &Rational) -> PhaseExpr {
        if s.is_zero() {
            return Self::zero();
        }
        PhaseExpr {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> PhaseExpr {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for k in self.terms.keys() {
            out.extend(k.monomial.0.keys().cloned());
            out.extend(k.exp.linear.keys().cloned());
        }
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        self.terms
            .keys()
            .any(|k| k.monomial.0.contains_key(name) || k.exp.linear.contains_key(name))
    }

    /// Highest power of `name` in the polynomial part; exponential dependence
    /// reports `None`.
    pub fn polynomial_degree_in(&self, name: &str) -> Option<u32> {
        let mut deg = 0;
        for k in self.terms.keys() {
            if k.exp.linear.contains_key(name) {
                return None;
            }
            deg = deg.max(k.monomial.power_of(name));
        }
        Some(deg)
    }

    /// True when every term is exponential-free with total degree at most one.
    pub fn is_affine(&self) -> bool {
        self.terms
            .keys()
            .all(|k| k.exp.is_trivial() && k.monomial.degree() <= 1)
    }

    fn to_exp_form(&self) -> Result<ExpForm, SymbolicError> {
        if !self.is_affine() {
            return Err(SymbolicError::Unsupported(format!(
                "exponent `{self}` is not a linear form"
            )));
        }
        let mut form = ExpForm::default();
        for (k, c) in &self.terms {
            match k.monomial.0.iter().next() {
                None => form.constant += c,
                Some((v, _)) => {
                    form.linear.insert(v.clone(), c.clone());
                }
            }
        }
        Ok(form)
    }

    /// Split `self = coeff·v + rest` when `self` is linear in `v` with a
    /// rational coefficient and `rest` does not contain `v`.
    pub fn linear_split(&self, name: &str) -> Option<(Rational, PhaseExpr)> {
        let mut coeff = Rational::zero();
        let mut rest = Self::zero();
        for (k, c) in &self.terms {
            if k.exp.linear.contains_key(name) {
                return None;
            }
            match k.monomial.power_of(name) {
                0 => rest.push(k.clone(), c.clone()),
                1 if k.monomial.degree() == 1 && k.exp.is_trivial() => coeff += c,
                _ => return None,
            }
        }
        (!coeff.is_zero()).then_some((coeff, rest))
    }

    /// Ratio `r` with `self = r · other`, if one exists.
    pub fn rational_multiple_of(&self, other: &PhaseExpr) -> Option<Rational> {
        if self.terms.len() != other.terms.len() || other.is_zero() {
            return None;
        }
        let mut ratio: Option<Rational> = None;
        for ((ka, ca), (kb, cb)) in self.terms.iter().zip(other.terms.iter()) {
            if ka != kb {
                return None;
            }
            let r = ca / cb;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev != r => return None,
                _ => {}
            }
        }
        ratio
    }

    /// Coefficient of the first term in canonical order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn diff(&self, name: &str) -> PhaseExpr {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let p = k.monomial.power_of(name);
            if p > 0 {
                let key = TermKey {
                    monomial: k.monomial.with_power(name, p - 1),
                    exp: k.exp.clone(),
                };
                out.push(key, c * Rational::from_integer(BigInt::from(p)));
            }
            let r = k.exp.coefficient_of(name);
            if !r.is_zero() {
                out.push(k.clone(), c * r);
            }
        }
        out
    }

    /// Replace every occurrence of `name` by `g`.
    pub fn substitute(&self, name: &str, g: &PhaseExpr) -> Result<PhaseExpr, SymbolicError> {
        if g.contains(name) {
            return Err(SymbolicError::Unsupported(format!(
                "substitution of `{name}` by an expression containing `{name}`"
            )));
        }
        let mut out = Self::zero();
        let mut powers: BTreeMap<u32, PhaseExpr> = BTreeMap::new();
        for (k, c) in &self.terms {
            let p = k.monomial.power_of(name);
            let r = k.exp.coefficient_of(name);
            if p == 0 && r.is_zero() {
                out.push(k.clone(), c.clone());
                continue;
            }
            let mut exp = k.exp.without(name);
            if !r.is_zero() {
                let form = g.scale(&r).to_exp_form().map_err(|_| {
                    SymbolicError::Unsupported(format!(
                        "substituting `{name}` -> `{g}` puts a nonlinear form inside exp"
                    ))
                })?;
                exp = exp.add(&form);
            }
            let base = PhaseExpr {
                terms: BTreeMap::from([(
                    TermKey {
                        monomial: k.monomial.without(name),
                        exp,
                    },
                    c.clone(),
                )]),
            };
            let gp = powers.entry(p).or_insert_with(|| g.pow(p));
            out = out + &base * &*gp;
        }
        Ok(out)
    }

    /// Numeric value with variables looked up through `lookup`.
    pub fn eval_with<F>(&self, lookup: F) -> Result<f64, SymbolicError>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let get = |v: &str| lookup(v).ok_or_else(|| SymbolicError::MissingValue(v.to_string()));
        let mut total = 0.0;
        for (k, c) in &self.terms {
            let mut term = rational_to_f64(c);
            for (v, p) in &k.monomial.0 {
                term *= get(v)?.powi(*p as i32);
            }
            if !k.exp.is_trivial() {
                let mut arg = rational_to_f64(&k.exp.constant);
                for (v, r) in &k.exp.linear {
                    arg += rational_to_f64(r) * get(v)?;
                }
                term *= arg.exp();
            }
            total += term;
        }
        Ok(total)
    }

    pub fn evaluate(&self, pt: &PhasePoint) -> Result<f64, SymbolicError> {
        self.eval_with(|v| pt.get(v))
    }
}

fn coeff_text(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for PhaseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() {
                factors.push(coeff_text(&mag));
            }
            for (v, p) in &k.monomial.0 {
                if *p == 1 {
                    factors.push(v.clone());
                } else {
                    factors.push(format!("{v}^{p}"));
                }
            }
            if !k.exp.is_trivial() {
                factors.push(format!("exp({})", k.exp.to_text()));
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Add<&PhaseExpr> for &PhaseExpr {
    type Output = PhaseExpr;
    fn add(self, rhs: &PhaseExpr) -> PhaseExpr {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }
}

impl Add for PhaseExpr {
    type Output = PhaseExpr;
    fn add(self, rhs: PhaseExpr) -> PhaseExpr {
        &self + &rhs
    }
}

impl Neg for &PhaseExpr {
    type Output = PhaseExpr;
    fn neg(self) -> PhaseExpr {
        self.scale(&-Rational::one())
    }
}

impl Neg for PhaseExpr {
    type Output = PhaseExpr;
    fn neg(self) -> PhaseExpr {
        -&self
    }
}

impl Sub<&PhaseExpr> for &PhaseExpr {
    type Output = PhaseExpr;
    fn sub(self, rhs: &PhaseExpr) -> PhaseExpr {
        self + &(-rhs)
    }
}

impl Sub for PhaseExpr {
    type Output = PhaseExpr;
    fn sub(self, rhs: PhaseExpr) -> PhaseExpr {
        &self - &rhs
    }
}

impl Mul<&PhaseExpr> for &PhaseExpr {
    type Output = PhaseExpr;
    fn mul(self, rhs: &PhaseExpr) -> PhaseExpr {
        let mut out = PhaseExpr::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let key = TermKey {
                    monomial: ka.monomial.mul(&kb.monomial),
                    exp: ka.exp.add(&kb.exp),
                };
                out.push(key, ca * cb);
            }
        }
        out
    }
}

impl Mul for PhaseExpr {
    type Output = PhaseExpr;
    fn mul(self, rhs: PhaseExpr) -> PhaseExpr {
        &self * &rhs
    }
}

/// Numeric assignment of phase-space (and parameter) variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhasePoint(BTreeMap<String, f64>);

impl PhasePoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<'a> FromIterator<(&'a str, f64)> for PhasePoint {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        PhasePoint(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}
