//! Evaluation backends that `eval` requests are forwarded to.

use serde_json::Value;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("integer overflow in {0}")]
    Overflow(String),
}

pub trait SceBackend: Send + Sync {
    fn eval(&self, expr: &str) -> Result<Value, BackendError>;
}

/// Integer arithmetic over `+`, `-` and `*` with parentheses and the usual
/// precedence. Anything else is unsupported.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockArithmetic;

impl SceBackend for MockArithmetic {
    fn eval(&self, expr: &str) -> Result<Value, BackendError> {
        let mut p = Arith {
            src: expr,
            bytes: expr.as_bytes(),
            pos: 0,
        };
        let v = p.sum()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.unsupported());
        }
        Ok(Value::from(v))
    }
}

struct Arith<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Arith<'_> {
    fn unsupported(&self) -> BackendError {
        BackendError::Unsupported(self.src.to_string())
    }

    fn overflow(&self) -> BackendError {
        BackendError::Overflow(self.src.to_string())
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<i64, BackendError> {
        let mut acc = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == b'+' { acc.checked_add(rhs) } else { acc.checked_sub(rhs) }
                .ok_or_else(|| self.overflow())?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<i64, BackendError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = acc.checked_mul(rhs).ok_or_else(|| self.overflow())?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<i64, BackendError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.unary()?.checked_neg().ok_or_else(|| self.overflow())
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.unsupported());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                self.src[start..self.pos].parse().map_err(|_| self.overflow())
            }
            _ => Err(self.unsupported()),
        }
    }
}
