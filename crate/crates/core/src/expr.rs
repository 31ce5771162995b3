//! A small parser for integer polynomial expressions such as `x^2 + 3*w*y - 1`.
//!
//! Parsing evaluates directly into a target ring, so the same grammar serves
//! ring elements, ideal generators and local ring constants.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// Something an expression can be evaluated in.
pub trait ExprTarget {
    type Value: Clone;
    fn int(&self, n: i64) -> Self::Value;
    fn symbol(&self, name: &str) -> Option<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, String>;

    fn pow(&self, a: &Self::Value, mut k: u64) -> Result<Self::Value, String> {
        let mut acc = self.int(1);
        let mut base = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }
}

struct Parser<'a, T: ExprTarget> {
    src: &'a [u8],
    pos: usize,
    target: &'a T,
}

impl<'a, T: ExprTarget> Parser<'a, T> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn number(&mut self) -> Result<u64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a number"))
    }

    fn expr(&mut self) -> Result<T::Value, ExprError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                self.target.neg(&t)
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.target.add(&acc, &t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.target.add(&acc, &self.target.neg(&t));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<T::Value, ExprError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.power()?;
            acc = self.target.mul(&acc, &f).map_err(ExprError::Eval)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<T::Value, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.number()?;
            return self.target.pow(&base, k).map_err(ExprError::Eval);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<T::Value, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                let n = i64::try_from(n).map_err(|_| self.err("integer too large"))?;
                Ok(self.target.int(n))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.target
                    .symbol(name)
                    .ok_or_else(|| ExprError::UnknownSymbol(name.to_string()))
            }
            _ => Err(self.err("expected a number, symbol or `(`")),
        }
    }
}

pub fn parse<T: ExprTarget>(target: &T, text: &str) -> Result<T::Value, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        target,
    };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ints;

    impl ExprTarget for Ints {
        type Value = i64;
        fn int(&self, n: i64) -> i64 {
            n
        }
        fn symbol(&self, name: &str) -> Option<i64> {
            (name == "x").then_some(3)
        }
        fn add(&self, a: &i64, b: &i64) -> i64 {
            a + b
        }
        fn neg(&self, a: &i64) -> i64 {
            -a
        }
        fn mul(&self, a: &i64, b: &i64) -> Result<i64, String> {
            Ok(a * b)
        }
    }

    #[test]
    fn evaluates_with_precedence() {
        assert_eq!(parse(&Ints, "x^2 + 2*x - 1").unwrap(), 14);
        assert_eq!(parse(&Ints, "-(x + 1)^2").unwrap(), -16);
        assert_eq!(parse(&Ints, "2*(x-1)*x").unwrap(), 12);
        assert!(matches!(parse(&Ints, "y"), Err(ExprError::UnknownSymbol(_))));
        assert!(parse(&Ints, "x +").is_err());
        assert!(parse(&Ints, "x x").is_err());
    }
}
