//! Recursive-descent parser for univariate expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right associative (`2^3^2` is `2^9`) and binds tighter than
//! unary minus, so `-x^2` is `-(x^2)`.

use std::collections::BTreeMap;

use super::expr::{self, Expr, Func};
use super::ParseError;

/// Parses `text` with `x` as the variable and no extra constants.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    Parser::new(text, "x", &BTreeMap::new())?.run()
}

/// Parses `text` with a custom variable name and named-constant bindings.
pub fn parse_with(
    text: &str,
    variable: &str,
    consts: &BTreeMap<String, f64>,
) -> Result<Expr, ParseError> {
    Parser::new(text, variable, consts)?.run()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    variable: &'a str,
    consts: &'a BTreeMap<String, f64>,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part only when digits follow the 'e'
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
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError {
                position: start,
                expected: "a valid number".into(),
            })?;
            out.push((start, Tok::Num(v)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(ParseError {
                    position: start,
                    expected: format!("an operator, operand or parenthesis (found '{c}')"),
                })
            }
        };
        out.push((start, tok));
        i += c.len_utf8();
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn new(
        text: &str,
        variable: &'a str,
        consts: &'a BTreeMap<String, f64>,
    ) -> Result<Parser<'a>, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            variable,
            consts,
        })
    }

    fn run(mut self) -> Result<Expr, ParseError> {
        let e = self.sum()?;
        match self.peek() {
            Tok::End => Ok(e),
            _ => Err(self.error("an operator or end of input")),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            expected: expected.to_string(),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Op('-') => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(expr::constant(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Tok::LParen = self.peek() {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        position: at,
                        expected: "a known function (sin, cos, exp, ln, sqrt, abs)".into(),
                    })?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(expr::call(func, arg));
                }
                if name == self.variable {
                    Ok(Expr::Var)
                } else if let Some(v) = self.consts.get(&name) {
                    Ok(expr::constant(*v))
                } else if name == "pi" {
                    Ok(expr::constant(std::f64::consts::PI))
                } else if name == "e" {
                    Ok(expr::constant(std::f64::consts::E))
                } else {
                    Err(ParseError {
                        position: at,
                        expected: format!("the variable '{}' or a bound constant (found '{name}')", self.variable),
                    })
                }
            }
            _ => Err(ParseError {
                position: at,
                expected: "an operand".into(),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error("')'")),
        }
    }
}
