//! Scalar expressions with exact symbolic differentiation.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" "-"? integer)?
//! primary := number | "i" | "pi" | variable
//!          | ("sin" | "cos" | "exp") "(" expr ")" | "(" expr ")"
//! number  := digits ("." digits?)? (("e" | "E") ("+" | "-")? digits)?
//!          | "." digits (("e" | "E") ("+" | "-")? digits)?
//! ```
//!
//! Variables are the names supplied to the parser (`x1 … xn`, `s`, `t`,
//! `z`). Exponents are integer literals only, so `-x^2` is `-(x^2)`.
//! All variables are real; `i` is the imaginary unit.

use std::fmt;

use crate::error::{Error, Result};
use crate::lie_core::{CMat, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == C64::new(v, 0.0))
}

impl Expr {
    pub fn real(v: f64) -> Expr {
        Expr::Const(C64::new(v, 0.0))
    }

    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn is_zero(&self) -> bool {
        is_const(self, 0.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if is_const(&a, 1.0) => b,
            _ if is_const(&b, 1.0) => a,
            _ if is_const(&a, -1.0) => Expr::neg(b),
            _ if is_const(&b, -1.0) => Expr::neg(a),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != C64::new(0.0, 0.0) => Expr::Const(x / y),
            _ if a.is_zero() => Expr::zero(),
            _ if is_const(&b, 1.0) => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (&a, n) {
            (_, 0) => Expr::real(1.0),
            (_, 1) => a,
            (Expr::Const(x), _) => Expr::Const(x.powi(n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(x.sin()),
            other => Expr::Sin(Box::new(other)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(x.cos()),
            other => Expr::Cos(Box::new(other)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(x.exp()),
            other => Expr::Exp(Box::new(other)),
        }
    }

    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
            len: src.len(),
        };
        let e = p.expr()?;
        if let Some((tok, off)) = p.tokens.get(p.pos) {
            return Err(Error::Parse {
                offset: *off,
                message: format!("unexpected token {tok:?}"),
            });
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &[f64]) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => C64::new(vars[*i], 0.0),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Pow(a, n) => a.eval(vars).powi(*n),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
            Expr::Exp(a) => a.eval(vars).exp(),
        }
    }

    /// Exact partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => Expr::real(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(var)),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::real(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.diff(var),
            ),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(var)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(var))),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.diff(var)),
        }
    }

    /// Complex conjugate, valid because variables are real and the
    /// elementary functions have real Taylor coefficients.
    pub fn conj(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Add(a, b) => Expr::add(a.conj(), b.conj()),
            Expr::Sub(a, b) => Expr::sub(a.conj(), b.conj()),
            Expr::Mul(a, b) => Expr::mul(a.conj(), b.conj()),
            Expr::Div(a, b) => Expr::div(a.conj(), b.conj()),
            Expr::Neg(a) => Expr::neg(a.conj()),
            Expr::Pow(a, n) => Expr::pow(a.conj(), *n),
            Expr::Sin(a) => Expr::sin(a.conj()),
            Expr::Cos(a) => Expr::cos(a.conj()),
            Expr::Exp(a) => Expr::exp(a.conj()),
        }
    }

    /// Replaces every variable `Var(i)` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => subs[*i].clone(),
            Expr::Add(a, b) => Expr::add(a.substitute(subs), b.substitute(subs)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(subs), b.substitute(subs)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(subs), b.substitute(subs)),
            Expr::Div(a, b) => Expr::div(a.substitute(subs), b.substitute(subs)),
            Expr::Neg(a) => Expr::neg(a.substitute(subs)),
            Expr::Pow(a, n) => Expr::pow(a.substitute(subs), *n),
            Expr::Sin(a) => Expr::sin(a.substitute(subs)),
            Expr::Cos(a) => Expr::cos(a.substitute(subs)),
            Expr::Exp(a) => Expr::exp(a.substitute(subs)),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.max_var()
            }
        }
    }

    /// Renders the expression in the parser's grammar.
    pub fn render(&self, vars: &[&str]) -> String {
        Render { e: self, vars }.to_string()
    }
}

struct Render<'a> {
    e: &'a Expr,
    vars: &'a [&'a str],
}

fn fmt_real(x: f64) -> String {
    let s = format!("{x:?}");
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for Render<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |e| Render { e, vars: self.vars };
        match self.e {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", fmt_real(c.re))
                } else if c.re == 0.0 {
                    write!(f, "({}*i)", fmt_real(c.im))
                } else {
                    write!(f, "({}+{}*i)", fmt_real(c.re), fmt_real(c.im))
                }
            }
            Expr::Var(i) => write!(f, "{}", self.vars[*i]),
            Expr::Add(a, b) => write!(f, "({}+{})", r(a), r(b)),
            Expr::Sub(a, b) => write!(f, "({}-{})", r(a), r(b)),
            Expr::Mul(a, b) => write!(f, "({}*{})", r(a), r(b)),
            Expr::Div(a, b) => write!(f, "({}/{})", r(a), r(b)),
            Expr::Neg(a) => write!(f, "(-{})", r(a)),
            Expr::Pow(a, n) => write!(f, "({}^{})", r(a), n),
            Expr::Sin(a) => write!(f, "sin({})", r(a)),
            Expr::Cos(a) => write!(f, "cos({})", r(a)),
            Expr::Exp(a) => write!(f, "exp({})", r(a)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Parse {
                offset: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, o)| *o).unwrap_or(self.len)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::add(e, self.term()?);
            } else if self.eat('-') {
                e = Expr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::mul(e, self.unary()?);
            } else if self.eat('/') {
                e = Expr::div(e, self.unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            let negative = self.eat('-');
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e6 => {
                    let n = *v as i32;
                    self.pos += 1;
                    return Ok(Expr::pow(base, if negative { -n } else { n }));
                }
                _ => return self.err("exponent must be an integer literal"),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("unexpected end of expression"),
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::real(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    self.pos += 1;
                    return Ok(Expr::Var(k));
                }
                match name.as_str() {
                    "i" => {
                        self.pos += 1;
                        Ok(Expr::Const(C64::new(0.0, 1.0)))
                    }
                    "pi" => {
                        self.pos += 1;
                        Ok(Expr::real(std::f64::consts::PI))
                    }
                    "sin" | "cos" | "exp" => {
                        self.pos += 1;
                        if !self.eat('(') {
                            return self.err(format!("expected `(` after `{name}`"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return self.err("expected `)`");
                        }
                        Ok(match name.as_str() {
                            "sin" => Expr::sin(arg),
                            "cos" => Expr::cos(arg),
                            _ => Expr::exp(arg),
                        })
                    }
                    _ => self.err(format!("unknown identifier `{name}`")),
                }
            }
            Tok::Op(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

/// A matrix of expressions, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::domain("entry count does not match the shape"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Parses a row-major array of expression strings.
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], vars: &[&str]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if r == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("expression matrix must be a non-empty rectangle"));
        }
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            for s in row {
                entries.push(Expr::parse(s.as_ref(), vars)?);
            }
        }
        Self::from_entries(r, c, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn constant(m: &CMat) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(Expr::Const(m[(i, j)]));
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    /// `m · f` for a constant matrix and a scalar expression.
    pub fn constant_times(m: &CMat, f: &Expr) -> Self {
        let mut out = Self::constant(m);
        for e in &mut out.entries {
            *e = Expr::mul(e.clone(), f.clone());
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn eval(&self, vars: &[f64]) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(vars))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn diff(&self, var: usize) -> Self {
        self.map(|e| e.diff(var))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| Expr::add(a.clone(), b.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| Expr::sub(a.clone(), b.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> Self {
        self.map(|e| Expr::mul(c.clone(), e.clone()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Expr::zero();
                for k in 0..self.cols {
                    acc = Expr::add(
                        acc,
                        Expr::mul(self.entry(i, k).clone(), other.entry(k, j).clone()),
                    );
                }
                entries.push(acc);
            }
        }
        Self {
            rows: self.rows,
            cols: other.cols,
            entries,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.entry(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn substitute(&self, subs: &[Expr]) -> Self {
        self.map(|e| e.substitute(subs))
    }

    pub fn max_var(&self) -> Option<usize> {
        self.entries.iter().filter_map(Expr::max_var).max()
    }

    pub fn render(&self, vars: &[&str]) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).render(vars)).collect())
            .collect()
    }
}
