//! Arithmetic expressions over the coordinates `x1`, `x2` (alias `x`, `y`).
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```
//! Functions: `sin cos tan exp log sqrt abs`.

use std::fmt;

use crate::error::HhoError;
use crate::mesh::Point;

/// Maximum nesting of parentheses, unary operators and powers.
pub const MAX_DEPTH: usize = 64;
pub const MAX_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Num(f64),
    Var(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call(Func),
}

/// A compiled expression in postfix form.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    ops: Vec<Op>,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    depth: usize,
    ops: Vec<Op>,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl fmt::Display) -> HhoError {
        HhoError::Expr(format!("{msg} at column {} in `{}`", self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn enter(&mut self) -> Result<(), HhoError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.error("expression nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<(), HhoError> {
        self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            self.term()?;
            self.ops.push(if c == b'+' { Op::Add } else { Op::Sub });
        }
        Ok(())
    }

    fn term(&mut self) -> Result<(), HhoError> {
        self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            self.unary()?;
            self.ops.push(if c == b'*' { Op::Mul } else { Op::Div });
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<(), HhoError> {
        self.enter()?;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.unary()?;
                self.ops.push(Op::Neg);
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()?;
            }
            _ => self.power()?,
        }
        self.depth -= 1;
        Ok(())
    }

    fn power(&mut self) -> Result<(), HhoError> {
        self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.unary()?;
            self.ops.push(Op::Pow);
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<(), HhoError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                self.enter()?;
                self.expr()?;
                self.depth -= 1;
                self.expect(b')')
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match name {
                    "x1" | "x" => self.ops.push(Op::Var(0)),
                    "x2" | "y" => self.ops.push(Op::Var(1)),
                    "pi" => self.ops.push(Op::Num(std::f64::consts::PI)),
                    _ => {
                        let f = Func::from_name(name).ok_or_else(|| {
                            self.pos = start;
                            self.error(format!("unknown identifier `{name}`"))
                        })?;
                        self.expect(b'(')?;
                        self.enter()?;
                        self.expr()?;
                        self.depth -= 1;
                        self.expect(b')')?;
                        self.ops.push(Op::Call(f));
                    }
                }
                Ok(())
            }
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<(), HhoError> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < b.len() && (b[p] == b'+' || b[p] == b'-') {
                p += 1;
            }
            if p < b.len() && b[p].is_ascii_digit() {
                while p < b.len() && b[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text.parse().map_err(|_| {
            self.pos = start;
            self.error(format!("invalid number `{text}`"))
        })?;
        self.ops.push(Op::Num(v));
        Ok(())
    }

    fn expect(&mut self, c: u8) -> Result<(), HhoError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, HhoError> {
        if src.len() > MAX_LEN {
            return Err(HhoError::Expr(format!("expression longer than {MAX_LEN} bytes")));
        }
        let mut p = Parser { src, bytes: src.as_bytes(), pos: 0, depth: 0, ops: Vec::new() };
        p.expr()?;
        if p.peek().is_some() {
            return Err(p.error("trailing input"));
        }
        Ok(Expr { source: src.to_string(), ops: p.ops })
    }

    pub fn eval(&self, x: Point) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        for op in &self.ops {
            match *op {
                Op::Num(v) => stack.push(v),
                Op::Var(i) => stack.push(x[i]),
                Op::Neg => {
                    let a = stack.pop().unwrap_or(f64::NAN);
                    stack.push(-a);
                }
                Op::Call(f) => {
                    let a = stack.pop().unwrap_or(f64::NAN);
                    stack.push(f.apply(a));
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                    let b = stack.pop().unwrap_or(f64::NAN);
                    let a = stack.pop().unwrap_or(f64::NAN);
                    stack.push(match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => a / b,
                        _ => a.powf(b),
                    });
                }
            }
        }
        stack.pop().unwrap_or(f64::NAN)
    }

    /// True when the expression does not involve the coordinates.
    pub fn is_constant(&self) -> bool {
        !self.ops.iter().any(|o| matches!(o, Op::Var(_)))
    }
}

/// A pair of expressions defining a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorExpr(pub [Expr; 2]);

impl VectorExpr {
    pub fn parse(a: &str, b: &str) -> Result<Self, HhoError> {
        Ok(VectorExpr([Expr::parse(a)?, Expr::parse(b)?]))
    }

    pub fn eval(&self, x: Point) -> [f64; 2] {
        [self.0[0].eval(x), self.0[1].eval(x)]
    }
}
