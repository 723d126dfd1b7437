//! Scalar string parser.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" int)?
//! atom   := integer | "q" | "(" expr ")"
//! ```

use num_bigint::BigInt;

use super::{Field, QScalar, Rational};
use crate::error::{Error, Result};

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    field: &'a Field,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        let s: String = self.chars.iter().collect();
        Error::Parse(format!("{msg} at offset {} in {s:?}", self.pos))
    }

    fn expr(&mut self) -> Result<QScalar> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<QScalar> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                '/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| self.err("division by zero"))?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<QScalar> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<QScalar> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let e = self.integer()?;
        let e: u32 = e.try_into().map_err(|_| self.err("exponent too large"))?;
        let mut acc = QScalar::one();
        for _ in 0..e {
            acc = acc * &base;
        }
        if neg {
            acc = acc.inv().ok_or_else(|| self.err("negative power of zero"))?;
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("bad integer"))
    }

    fn atom(&mut self) -> Result<QScalar> {
        match self.peek() {
            Some('q') => {
                self.pos += 1;
                Ok(self.field.q())
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                Ok(QScalar::Rat(Rational::from_integer(self.integer()?)))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

pub(super) fn parse_scalar(s: &str, field: &Field) -> Result<QScalar> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { chars, pos: 0, field };
    let v = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

pub(super) fn parse_rational(s: &str) -> Result<Rational> {
    match parse_scalar(s, &Field::Symbolic)? {
        QScalar::Rat(r) => Ok(r),
        QScalar::Sym(_) => Err(Error::Parse(format!("{s:?} is not a rational number"))),
    }
}
