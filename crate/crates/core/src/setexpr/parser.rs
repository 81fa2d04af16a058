//! Recursive-descent parser for the set-expression grammar:
//!
//! ```text
//! union  := inter ('|' inter)*
//! inter  := unary (('&' | '\') unary)*       left-associative
//! unary  := '!' unary | atom
//! atom   := 'primes' | 'all' | 'empty' | 'class' '(' int ',' int ')'
//!         | '{' [int (',' int)*] '}' | '(' union ')'
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::SetExpr;
use crate::numtheory::ResidueClass;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseLimits {
    pub max_depth: usize,
    pub max_nodes: usize,
    pub max_finite_len: usize,
}

impl Default for ParseLimits {
    fn default() -> Self {
        ParseLimits {
            max_depth: 200,
            max_nodes: 100_000,
            max_finite_len: 10_000,
        }
    }
}

pub fn parse(text: &str) -> Result<SetExpr, Error> {
    parse_with(text, &ParseLimits::default())
}

pub fn parse_with(text: &str, limits: &ParseLimits) -> Result<SetExpr, Error> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        depth: 0,
        nodes: 0,
        limits,
    };
    let expr = p.union()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
    nodes: usize,
    limits: &'a ParseLimits,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: String::from(message),
        }
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

    fn expect(&mut self, c: u8) -> Result<(), Error> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn node(&mut self) -> Result<(), Error> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::ExpressionTooLarge {
                message: format!("more than {} nodes", self.limits.max_nodes),
            });
        }
        Ok(())
    }

    fn enter(&mut self) -> Result<(), Error> {
        self.depth += 1;
        if self.depth > self.limits.max_depth {
            return Err(Error::ExpressionTooLarge {
                message: format!("nesting deeper than {}", self.limits.max_depth),
            });
        }
        Ok(())
    }

    fn union(&mut self) -> Result<SetExpr, Error> {
        let first = self.inter()?;
        let mut parts = Vec::new();
        while self.peek() == Some(b'|') {
            self.pos += 1;
            parts.push(self.inter()?);
        }
        if parts.is_empty() {
            return Ok(first);
        }
        self.node()?;
        parts.insert(0, first);
        Ok(SetExpr::Union(parts))
    }

    fn inter(&mut self) -> Result<SetExpr, Error> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = match acc {
                        // Chains of `&` flatten; a `\` in between closes the chain.
                        SetExpr::Intersection(mut es) if !es.is_empty() => {
                            es.push(rhs);
                            SetExpr::Intersection(es)
                        }
                        other => {
                            self.node()?;
                            SetExpr::Intersection(alloc::vec![other, rhs])
                        }
                    };
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    self.node()?;
                    acc = SetExpr::Difference(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SetExpr, Error> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            self.node()?;
            return Ok(SetExpr::Complement(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<SetExpr, Error> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.enter()?;
                let inner = self.union()?;
                self.depth -= 1;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'{') => self.finite(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                self.node()?;
                match word {
                    b"primes" => Ok(SetExpr::Primes),
                    b"all" => Ok(SetExpr::All),
                    b"empty" => Ok(SetExpr::Empty),
                    b"class" => self.class(start),
                    _ => {
                        self.pos = start;
                        Err(self.error("unknown identifier"))
                    }
                }
            }
            Some(_) => Err(self.error("expected a set")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn class(&mut self, start: usize) -> Result<SetExpr, Error> {
        self.expect(b'(')?;
        let shift = self.integer()?;
        self.expect(b',')?;
        let modulus_at = {
            self.skip_ws();
            self.pos
        };
        let modulus = self.integer()?;
        self.expect(b')')?;
        if modulus == 0 {
            return Err(Error::ZeroModulus { offset: start });
        }
        if modulus < 0 || modulus > u64::MAX as i128 {
            self.pos = modulus_at;
            return Err(self.error("modulus must be a positive 64-bit integer"));
        }
        Ok(SetExpr::Class(ResidueClass::new(shift, modulus as u64)?))
    }

    fn finite(&mut self) -> Result<SetExpr, Error> {
        let start = self.pos;
        self.expect(b'{')?;
        self.node()?;
        let mut members = Vec::new();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(SetExpr::Finite(members));
        }
        loop {
            let at = self.pos;
            let v = self.integer()?;
            let v = i64::try_from(v).map_err(|_| Error::Syntax {
                offset: at,
                message: String::from("finite-set member does not fit in 64 bits"),
            })?;
            members.push(v);
            if members.len() > self.limits.max_finite_len {
                return Err(Error::FiniteSetTooLarge {
                    offset: start,
                    len: members.len(),
                    limit: self.limits.max_finite_len,
                });
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("expected ',' or '}'")),
            }
        }
        Ok(SetExpr::finite(members))
    }

    fn integer(&mut self) -> Result<i128, Error> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected an integer"));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<i128>()
            .ok()
            .filter(|v| *v >= i64::MIN as i128 && *v <= u64::MAX as i128)
            .ok_or_else(|| {
                self.pos = start;
                self.error("integer out of range")
            })
    }
}
