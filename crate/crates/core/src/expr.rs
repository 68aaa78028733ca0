//! Class expressions: `CP2 - 9/8*CP1^2`, `(3*CP3 - 8*CP1*CP2 + 5*CP1^3)`.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := rational | 'CP' uint | '(' expr ')' | '-' atom
//! ```

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::arith::{BigInt, Rat};
use crate::error::{Error, Result};
use crate::graded::GradedPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassExpr {
    /// Nonnegative, reduced.
    Rational(Rat),
    Cp(u32),
    Sum(Box<ClassExpr>, Box<ClassExpr>),
    Difference(Box<ClassExpr>, Box<ClassExpr>),
    Product(Box<ClassExpr>, Box<ClassExpr>),
    Power(Box<ClassExpr>, u32),
    Paren(Box<ClassExpr>),
    Neg(Box<ClassExpr>),
}

impl ClassExpr {
    pub fn eval(&self) -> GradedPoly {
        match self {
            ClassExpr::Rational(r) => GradedPoly::constant(r.clone()),
            ClassExpr::Cp(n) => GradedPoly::cp(*n),
            ClassExpr::Sum(a, b) => &a.eval() + &b.eval(),
            ClassExpr::Difference(a, b) => &a.eval() - &b.eval(),
            ClassExpr::Product(a, b) => &a.eval() * &b.eval(),
            ClassExpr::Power(a, e) => a.eval().pow(*e),
            ClassExpr::Paren(a) => a.eval(),
            ClassExpr::Neg(a) => -&a.eval(),
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, ClassExpr::Rational(_) | ClassExpr::Cp(_) | ClassExpr::Paren(_) | ClassExpr::Neg(_))
    }

    fn is_factor(&self) -> bool {
        self.is_atom() || matches!(self, ClassExpr::Power(..))
    }

    fn is_term(&self) -> bool {
        self.is_factor() || matches!(self, ClassExpr::Product(..))
    }
}

struct Wrapped<'a>(&'a ClassExpr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassExpr::Rational(r) => write!(f, "{r}"),
            ClassExpr::Cp(n) => write!(f, "CP{n}"),
            ClassExpr::Sum(a, b) => write!(f, "{} + {}", a, Wrapped(b, !b.is_term())),
            ClassExpr::Difference(a, b) => write!(f, "{} - {}", a, Wrapped(b, !b.is_term())),
            ClassExpr::Product(a, b) => write!(f, "{}*{}", Wrapped(a, !a.is_term()), Wrapped(b, !b.is_factor())),
            ClassExpr::Power(a, e) => write!(f, "{}^{e}", Wrapped(a, !a.is_atom())),
            ClassExpr::Paren(a) => write!(f, "({a})"),
            ClassExpr::Neg(a) => write!(f, "-{}", Wrapped(a, !a.is_atom())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Cp(u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |start: usize| {
        let mut j = start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((i, t));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let j = digits(i);
            out.push((i, Tok::Num(text[i..j].parse().unwrap())));
            i = j;
        } else if text[i..].starts_with("CP") {
            let j = digits(i + 2);
            if j == i + 2 {
                return Err(parse_err(i + 2, "expected an index after CP"));
            }
            let n: u32 = text[i + 2..j].parse().map_err(|_| parse_err(i + 2, "generator index too large"))?;
            if n == 0 {
                return Err(parse_err(i + 2, "generator indices start at 1"));
            }
            out.push((i, Tok::Cp(n)));
            i = j;
        } else {
            let ch = text[i..].chars().next().unwrap();
            return Err(parse_err(i, format!("unexpected character '{ch}'")));
        }
    }
    Ok(out)
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    /// Offset of the current token, or of the last one at end of input.
    fn offset(&self) -> usize {
        match self.toks.get(self.pos) {
            Some((o, _)) => *o,
            None => self.toks.last().map_or(0, |(o, _)| *o),
        }
    }

    fn error(&self, expected: &str) -> Error {
        let message = match self.peek() {
            None => format!("unexpected end of input, expected {expected}"),
            Some(t) => format!("unexpected {t:?}, expected {expected}"),
        };
        parse_err(self.offset(), message)
    }

    fn expr(&mut self) -> Result<ClassExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = ClassExpr::Sum(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = ClassExpr::Difference(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ClassExpr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = ClassExpr::Product(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ClassExpr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.offset();
        match self.next() {
            Some(Tok::Num(n)) => {
                let e = u32::try_from(&n).map_err(|_| parse_err(at, "exponent too large"))?;
                Ok(ClassExpr::Power(Box::new(base), e))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("an exponent"))
            }
        }
    }

    fn atom(&mut self) -> Result<ClassExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                if self.peek() != Some(&Tok::Slash) {
                    return Ok(ClassExpr::Rational(Rat::from_integer(n)));
                }
                self.pos += 1;
                let at = self.offset();
                match self.next() {
                    Some(Tok::Num(d)) if d.is_zero() => Err(parse_err(at, "zero denominator")),
                    Some(Tok::Num(d)) => Ok(ClassExpr::Rational(Rat::new(n, d))),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("a denominator"))
                    }
                }
            }
            Some(Tok::Cp(n)) => {
                self.pos += 1;
                Ok(ClassExpr::Cp(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                Ok(ClassExpr::Paren(Box::new(inner)))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(ClassExpr::Neg(Box::new(self.atom()?)))
            }
            _ => Err(self.error("a number, CP<n>, '(' or '-'")),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<ClassExpr> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(parse_err(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

impl FromStr for ClassExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str) -> Result<GradedPoly> {
    Ok(parse_expr(text)?.eval())
}
