//! Text grammar for phase-space expressions.
//!
//! ```text
//! expr   := ['-'|'+'] term (('+'|'-') term)*
//! term   := factor (('*' factor) | ('/' number))*
//! factor := number | ident ['^' uint] | 'exp' '(' expr ')' | '(' expr ')' ['^' uint] | '-' factor
//! ```
//!
//! Numbers are exact: `3`, `1/2`, `0.25` and `1e-3` all parse to rationals.
//! The argument of `exp` must reduce to a linear form.

use num_bigint::BigInt;
use num_traits::Zero;

use super::expr::{PhaseExpr, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprSyntaxError {
    /// 1-based character column within the parsed text.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, ExprSyntaxError> {
    Err(ExprSyntaxError {
        column,
        message: message.into(),
    })
}

fn parse_number(text: &str, column: usize) -> Result<Rational, ExprSyntaxError> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = text[i + 1..]
                .parse()
                .or_else(|_| err(column, format!("bad exponent in `{text}`")))?;
            (&text[..i], e)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return err(column, format!("malformed number `{text}`"));
    }
    let numer: BigInt = digits.parse().expect("digits checked");
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprSyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            out.push((Tok::Num(parse_number(&lit, col)?), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => return err(col, format!("unexpected character `{other}`")),
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    declared: &'a dyn Fn(&str) -> bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprSyntaxError> {
        let col = self.col();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => err(col, format!("expected {what}")),
        }
    }

    fn expr(&mut self) -> Result<PhaseExpr, ExprSyntaxError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PhaseExpr, ExprSyntaxError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc * self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let col = self.col();
                    match self.bump() {
                        Some(Tok::Num(n)) if !n.is_zero() => acc = acc.scale(&n.recip()),
                        Some(Tok::Num(_)) => return err(col, "division by zero"),
                        _ => return err(col, "only division by a number literal is supported"),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Option<u32>, ExprSyntaxError> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(None);
        }
        self.bump();
        let col = self.col();
        match self.bump() {
            Some(Tok::Num(n)) if n.is_integer() && n >= Rational::zero() => {
                let k: u32 = n
                    .numer()
                    .try_into()
                    .or_else(|_| err(col, "exponent too large"))?;
                Ok(Some(k))
            }
            _ => err(col, "expected a non-negative integer exponent"),
        }
    }

    fn factor(&mut self) -> Result<PhaseExpr, ExprSyntaxError> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(PhaseExpr::constant(n)),
            Some(Tok::Minus) => Ok(-self.factor()?),
            Some(Tok::Ident(name)) if name == "exp" && self.peek() == Some(&Tok::LParen) => {
                self.bump();
                let arg_col = self.col();
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                PhaseExpr::exp(&arg).or_else(|_| err(arg_col, "argument of exp must be linear"))
            }
            Some(Tok::Ident(name)) => {
                if !(self.declared)(&name) {
                    return err(col, format!("undeclared variable `{name}`"));
                }
                let base = PhaseExpr::var(&name);
                Ok(match self.power()? {
                    Some(k) => base.pow(k),
                    None => base,
                })
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match self.power()? {
                    Some(k) => inner.pow(k),
                    None => inner,
                })
            }
            Some(_) => err(col, "expected a number, variable, `exp(` or `(`"),
            None => err(col, "unexpected end of expression"),
        }
    }
}

/// Parse `text`, accepting only identifiers for which `declared` returns true.
pub fn parse_expr_with(text: &str, declared: &dyn Fn(&str) -> bool) -> Result<PhaseExpr, ExprSyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: text.chars().count() + 1,
        declared,
    };
    if p.peek().is_none() {
        return err(1, "empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return err(p.col(), "unexpected trailing input");
    }
    Ok(e)
}

/// Parse `text` accepting any identifier.
pub fn parse_expr(text: &str) -> Result<PhaseExpr, ExprSyntaxError> {
    parse_expr_with(text, &|_| true)
}

/// Parse an exact rational literal such as `-3/4` or `0.5`.
pub fn parse_rational(text: &str) -> Result<Rational, ExprSyntaxError> {
    let e = parse_expr_with(text, &|_| false)?;
    e.as_constant()
        .ok_or_else(|| ExprSyntaxError {
            column: 1,
            message: format!("`{text}` is not a number"),
        })
}
