//! Text grammar for expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := sign? coeff? '*'? factor*
//! coeff  := digits ('/' digits)?
//! factor := name ('^' '-'? digits)?
//! ```
//!
//! Whitespace is ignored; factors may also be joined by `*`. The output of
//! [`SparseExpr::canonical_string`] is accepted as-is.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use super::{Monomial, Rational, SparseExpr, Var};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn term(&mut self) -> Result<(Monomial, Rational)> {
        let mut negative = false;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            negative ^= c == b'-';
            self.pos += 1;
        }
        let mut coeff = Rational::one();
        let mut saw_coeff = false;
        if let Some(n) = self.digits() {
            saw_coeff = true;
            let d = if self.peek() == Some(b'/') {
                self.pos += 1;
                match self.digits() {
                    Some(d) if d != BigInt::from(0) => d,
                    _ => return self.err("expected nonzero denominator"),
                }
            } else {
                BigInt::one()
            };
            coeff = Rational::new(n, d);
        }
        let mut factors = Vec::new();
        loop {
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let Some(var) = Var::from_name(name) else {
                        self.pos = start;
                        return self.err(format!("unknown variable `{name}`"));
                    };
                    let mut exp = 1i32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let neg = if self.peek() == Some(b'-') {
                            self.pos += 1;
                            true
                        } else {
                            false
                        };
                        let Some(e) = self.digits() else {
                            return self.err("expected exponent");
                        };
                        let e: i32 = match i32::try_from(e) {
                            Ok(e) => e,
                            Err(_) => return self.err("exponent out of range"),
                        };
                        exp = if neg { -e } else { e };
                    }
                    factors.push((var, exp));
                }
                _ => break,
            }
        }
        if !saw_coeff && factors.is_empty() {
            return self.err("expected a term");
        }
        if negative {
            coeff = -coeff;
        }
        Ok((Monomial::from_factors(factors), coeff))
    }

    fn expr(&mut self) -> Result<SparseExpr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => terms.push(self.term()?),
                Some(_) => return self.err("unexpected character"),
            }
        }
        SparseExpr::from_terms(terms)
    }
}

pub(crate) fn parse_expr(s: &str) -> Result<SparseExpr> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    p.expr()
}

impl FromStr for SparseExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}
