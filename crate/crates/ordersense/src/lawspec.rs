//! Text form of input laws.
//!
//! ```text
//! U[a,b]            uniform
//! Exp(l)            exponential with rate l
//! N(m,var)          normal
//! NT(m,var)@[a,b]   normal conditioned on [a, b]
//! ET(l)@[a,b]       exponential conditioned on [a, b]
//! D{(x,p),...}      finite atoms; p may be written as a fraction 19/20
//! ```

use std::fmt::Write as _;

use ordersense_core::distributions::Family;
use ordersense_core::Distribution;

use crate::error::CliError;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn err(&self, what: &str) -> CliError {
        CliError::LawSpec {
            spec: self.src.to_string(),
            message: format!("{what} at offset {}", self.pos),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), CliError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{token}`")))
        }
    }

    fn number(&mut self) -> Result<f64, CliError> {
        self.skip_ws();
        let end = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..end];
        let v: f64 = text.parse().map_err(|_| self.err(&format!("bad number `{text}`")))?;
        self.pos += end;
        if self.eat("/") {
            let d = self.number()?;
            return Ok(v / d);
        }
        Ok(v)
    }

    fn window(&mut self) -> Result<(f64, f64), CliError> {
        self.expect("[")?;
        let a = self.number()?;
        self.expect(",")?;
        let b = self.number()?;
        self.expect("]")?;
        Ok((a, b))
    }

    fn pair(&mut self) -> Result<(f64, f64), CliError> {
        self.expect("(")?;
        let a = self.number()?;
        self.expect(",")?;
        let b = self.number()?;
        self.expect(")")?;
        Ok((a, b))
    }

    fn single(&mut self) -> Result<f64, CliError> {
        self.expect("(")?;
        let a = self.number()?;
        self.expect(")")?;
        Ok(a)
    }

    fn finish(&mut self) -> Result<(), CliError> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.err("trailing input"))
        }
    }
}

/// Parses one law.
pub fn parse_law(spec: &str) -> Result<Distribution, CliError> {
    let mut c = Cursor::new(spec);
    let law = if c.eat("NT") {
        let (m, v) = c.pair()?;
        c.expect("@")?;
        let (a, b) = c.window()?;
        Distribution::truncated_normal(m, v, a, b)
    } else if c.eat("ET") {
        let l = c.single()?;
        c.expect("@")?;
        let (a, b) = c.window()?;
        Distribution::truncated_exponential(l, a, b)
    } else if c.eat("Exp") {
        Distribution::exponential(c.single()?)
    } else if c.eat("U") {
        let (a, b) = c.window()?;
        Distribution::uniform(a, b)
    } else if c.eat("N") {
        let (m, v) = c.pair()?;
        Distribution::normal(m, v)
    } else if c.eat("D") {
        c.expect("{")?;
        let mut atoms = vec![c.pair()?];
        while c.eat(",") {
            atoms.push(c.pair()?);
        }
        c.expect("}")?;
        Distribution::discrete(&atoms)
    } else {
        return Err(c.err("unknown law (expected U, Exp, N, NT, ET or D)"));
    };
    c.finish()?;
    law.map_err(|e| CliError::LawSpec {
        spec: spec.to_string(),
        message: e.to_string(),
    })
}

/// Comma-separated list of laws; commas inside brackets do not split.
pub fn parse_law_list(list: &str) -> Result<Vec<Distribution>, CliError> {
    split_top_level(list).into_iter().map(parse_law).collect()
}

pub(crate) fn split_top_level(list: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in list.char_indices() {
        match ch {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push(list[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = list[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

/// Canonical text form; `parse_law(&format_law(d)) == d`.
pub fn format_law(d: &Distribution) -> String {
    match d.family() {
        Family::Uniform { a, b } => format!("U[{a},{b}]"),
        Family::Exponential { rate } => format!("Exp({rate})"),
        Family::Normal { mean, variance } => format!("N({mean},{variance})"),
        Family::TruncatedNormal { mean, variance, a, b } => format!("NT({mean},{variance})@[{a},{b}]"),
        Family::TruncatedExponential { rate, a, b } => format!("ET({rate})@[{a},{b}]"),
        Family::Discrete { atoms } => {
            let mut s = String::from("D{");
            for (i, (x, p)) in atoms.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "({x},{p})");
            }
            s.push('}');
            s
        }
    }
}
