//! Structured output functions written as text.
//!
//! Variables are `x1 … xk`. Numbers, `+ - * / ^`, parentheses and the
//! functions `exp log sqrt abs min max step` are available; `step(t)` is 1
//! for `t > 0` and 0 otherwise. The expression must expand into a constant
//! plus a sum of products of one-variable pieces, e.g.
//!
//! ```text
//! exp(exp(x1)) * exp(x2) * exp(x3)
//! exp(x1^2) * 1 + exp(x1)
//! x1 + 2 * x2 - 3
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use ordersense_core::hoeffding::{ProductTerm, ScalarFn, StructuredFunction};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based input index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Step,
}

impl Func {
    fn from_name(s: &str) -> Option<(Self, usize)> {
        Some(match s {
            "exp" => (Func::Exp, 1),
            "log" | "ln" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "step" => (Func::Step, 1),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Step => "step",
        }
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(j) => x[*j],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(x)),
                    Func::Max => a.max(args[1].eval(x)),
                    Func::Step => {
                        if a > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
    }

    fn vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(j) => {
                out.insert(*j);
            }
            Expr::Neg(e) => e.vars(out),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn var_set(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        self.vars(&mut s);
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(j) => write!(f, "x{}", j + 1),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                    Op::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, CliError> {
    let err = |m: String| CliError::Expression {
        expr: src.to_string(),
        message: m,
    };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| err(format!("bad number `{text}`")))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, m: impl Into<String>) -> CliError {
        CliError::Expression {
            expr: self.src.to_string(),
            message: m.into(),
        }
    }

    fn peek_sym(&self, c: char) -> bool {
        self.toks.get(self.pos) == Some(&Tok::Sym(c))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, CliError> {
        let mut e = self.product()?;
        loop {
            if self.eat_sym('+') {
                e = Expr::Bin(Op::Add, Box::new(e), Box::new(self.product()?));
            } else if self.eat_sym('-') {
                e = Expr::Bin(Op::Sub, Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, CliError> {
        let mut e = self.unary()?;
        loop {
            if self.eat_sym('*') {
                e = Expr::Bin(Op::Mul, Box::new(e), Box::new(self.unary()?));
            } else if self.eat_sym('/') {
                e = Expr::Bin(Op::Div, Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, CliError> {
        if self.eat_sym('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, CliError> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, CliError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat_sym(')') {
                    return Err(self.err("missing `)`"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if idx == 0 {
                        return Err(self.err("variables are numbered from x1"));
                    }
                    return Ok(Expr::Var(idx - 1));
                }
                let (func, arity) =
                    Func::from_name(&name).ok_or_else(|| self.err(format!("unknown name `{name}`")))?;
                if !self.eat_sym('(') {
                    return Err(self.err(format!("`{name}` needs arguments")));
                }
                let mut args = vec![self.sum()?];
                while self.eat_sym(',') {
                    args.push(self.sum()?);
                }
                if !self.eat_sym(')') {
                    return Err(self.err("missing `)`"));
                }
                if args.len() != arity {
                    return Err(self.err(format!("`{name}` takes {arity} argument(s)")));
                }
                Ok(Expr::Call(func, args))
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, CliError> {
    let mut p = Parser {
        src,
        toks: tokenize(src)?,
        pos: 0,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

// Expansion into c + Σ_a coef_a Π_j piece_{a,j}(x_j).
#[derive(Debug, Clone)]
struct Sop {
    constant: f64,
    terms: Vec<(f64, BTreeMap<usize, Expr>)>,
}

impl Sop {
    fn constant(c: f64) -> Self {
        Sop {
            constant: c,
            terms: Vec::new(),
        }
    }

    fn scale(mut self, s: f64) -> Self {
        self.constant *= s;
        for t in &mut self.terms {
            t.0 *= s;
        }
        self
    }

    fn add(mut self, other: Sop) -> Self {
        self.constant += other.constant;
        self.terms.extend(other.terms);
        self
    }

    fn mul(self, other: Sop) -> Self {
        let mut out = Sop::constant(self.constant * other.constant);
        for t in &other.terms {
            if self.constant != 0.0 {
                out.terms.push((self.constant * t.0, t.1.clone()));
            }
        }
        for t in &self.terms {
            if other.constant != 0.0 {
                out.terms.push((other.constant * t.0, t.1.clone()));
            }
            for u in &other.terms {
                let mut pieces = t.1.clone();
                for (j, e) in &u.1 {
                    let merged = match pieces.remove(j) {
                        Some(prev) => Expr::Bin(Op::Mul, Box::new(prev), Box::new(e.clone())),
                        None => e.clone(),
                    };
                    pieces.insert(*j, merged);
                }
                out.terms.push((t.0 * u.0, pieces));
            }
        }
        out
    }
}

fn to_sop(e: &Expr, src: &str) -> Result<Sop, CliError> {
    let vars = e.var_set();
    if vars.is_empty() {
        return Ok(Sop::constant(e.eval(&[])));
    }
    if vars.len() == 1 {
        let j = *vars.iter().next().expect("one variable");
        return Ok(Sop {
            constant: 0.0,
            terms: vec![(1.0, BTreeMap::from([(j, e.clone())]))],
        });
    }
    let not_structured = || CliError::Expression {
        expr: src.to_string(),
        message: format!("`{e}` mixes several inputs inside a non-separable operation"),
    };
    match e {
        Expr::Neg(a) => Ok(to_sop(a, src)?.scale(-1.0)),
        Expr::Bin(Op::Add, a, b) => Ok(to_sop(a, src)?.add(to_sop(b, src)?)),
        Expr::Bin(Op::Sub, a, b) => Ok(to_sop(a, src)?.add(to_sop(b, src)?.scale(-1.0))),
        Expr::Bin(Op::Mul, a, b) => Ok(to_sop(a, src)?.mul(to_sop(b, src)?)),
        Expr::Bin(Op::Div, a, b) => {
            let bv = b.var_set();
            if bv.is_empty() {
                Ok(to_sop(a, src)?.scale(1.0 / b.eval(&[])))
            } else if bv.len() == 1 {
                let recip = Expr::Bin(Op::Div, Box::new(Expr::Num(1.0)), b.clone());
                Ok(to_sop(a, src)?.mul(to_sop(&recip, src)?))
            } else {
                Err(not_structured())
            }
        }
        Expr::Bin(Op::Pow, a, b) if b.var_set().is_empty() => {
            let n = b.eval(&[]);
            if n.fract() != 0.0 || !(0.0..=8.0).contains(&n) {
                return Err(not_structured());
            }
            let base = to_sop(a, src)?;
            let mut acc = Sop::constant(1.0);
            for _ in 0..n as usize {
                acc = acc.mul(base.clone());
            }
            Ok(acc)
        }
        _ => Err(not_structured()),
    }
}

fn piece(e: Expr) -> ScalarFn {
    let name = e.to_string();
    let e = Arc::new(e);
    // the piece depends on one input; feed its value at every index
    let width = e.var_set().iter().next().map_or(0, |j| j + 1);
    ScalarFn::new(name, move |t| {
        let mut x = [0.0f64; 64];
        x[..width].fill(t);
        e.eval(&x[..width])
    })
}

/// Builds the structured form of `src` over `k` inputs (at least as many
/// as the highest variable index used).
pub fn parse_structured(src: &str, k: usize) -> Result<StructuredFunction, CliError> {
    let e = parse_expr(src)?;
    let used = e.var_set();
    if let Some(&max) = used.iter().next_back() {
        if max >= k {
            return Err(CliError::Expression {
                expr: src.to_string(),
                message: format!("uses x{} but only {k} inputs were given", max + 1),
            });
        }
    }
    let sop = to_sop(&e, src)?;
    let core = |r: ordersense_core::Result<StructuredFunction>| {
        r.map_err(|err| CliError::Expression {
            expr: src.to_string(),
            message: err.to_string(),
        })
    };
    let terms: Vec<_> = sop.terms.into_iter().filter(|t| t.0 != 0.0).collect();

    if terms.iter().all(|t| t.1.len() <= 1) {
        // Additive: fold coefficients and repeated inputs into one piece each.
        let mut pieces: Vec<Option<Expr>> = vec![None; k];
        let mut constant = sop.constant;
        for (c, map) in terms {
            let Some((j, e)) = map.into_iter().next() else {
                constant += c;
                continue;
            };
            let scaled = if c == 1.0 {
                e
            } else {
                Expr::Bin(Op::Mul, Box::new(Expr::Num(c)), Box::new(e))
            };
            pieces[j] = Some(match pieces[j].take() {
                Some(prev) => Expr::Bin(Op::Add, Box::new(prev), Box::new(scaled)),
                None => scaled,
            });
        }
        return core(StructuredFunction::additive(
            pieces.into_iter().map(|p| p.map(piece)).collect(),
            constant,
        ));
    }

    let to_factors = |map: BTreeMap<usize, Expr>| {
        let mut f = vec![None; k];
        for (j, e) in map {
            f[j] = Some(piece(e));
        }
        f
    };

    if terms.len() == 1 {
        let (c, map) = terms.into_iter().next().expect("one term");
        return core(StructuredFunction::product(c, to_factors(map), sop.constant));
    }

    let disjoint = {
        let mut seen = BTreeSet::new();
        terms.iter().all(|t| t.0 == 1.0 && t.1.keys().all(|j| seen.insert(*j)))
    };
    if disjoint {
        let blocks = terms
            .into_iter()
            .map(|(_, map)| map.into_iter().map(|(j, e)| (j, piece(e))).collect())
            .collect();
        return core(StructuredFunction::partitioned(k, blocks, sop.constant));
    }
    let terms = terms
        .into_iter()
        .map(|(c, map)| ProductTerm::new(c, to_factors(map)))
        .collect();
    core(StructuredFunction::sum_of_products(k, terms, sop.constant))
}
