//! Expressions in `t` with complex constants.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | 'i' | 't' | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'sqrt'
//! ```
//!
//! `^` binds tighter than unary minus, so `-t^2` is `-(t^2)`, and it is
//! right-associative. Multiplication must be written out: `4t` and `4 t` are
//! rejected.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree. Literals are non-negative; a leading minus is a
/// [`FunctionExpr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionExpr {
    Num(f64),
    Pi,
    I,
    T,
    Neg(Box<FunctionExpr>),
    Binary(BinOp, Box<FunctionExpr>, Box<FunctionExpr>),
    Call(Func, Box<FunctionExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
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
            let text = &src[start..i];
            let v = f64::from_str(text).map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(text.to_string()),
                offset: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().expect("index is on a char boundary");
            return Err(ParseError {
                kind: ParseErrorKind::UnexpectedChar(ch),
                offset: i,
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Unexpected {
                expected,
                found: self.peek().to_string(),
            },
            offset: self.offset(),
        }
    }

    fn expect(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self) -> Result<FunctionExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = FunctionExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<FunctionExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = FunctionExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<FunctionExpr, ParseError> {
        if self.eat('-') {
            return Ok(FunctionExpr::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(FunctionExpr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<FunctionExpr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(FunctionExpr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "pi" => Ok(FunctionExpr::Pi),
                    "i" => Ok(FunctionExpr::I),
                    "t" => Ok(FunctionExpr::T),
                    _ => match Func::from_name(&name) {
                        Some(func) => {
                            self.expect('(', "`(` after function name")?;
                            let arg = self.expr()?;
                            self.expect(')', "`)`")?;
                            Ok(FunctionExpr::Call(func, Box::new(arg)))
                        }
                        None => Err(ParseError {
                            kind: ParseErrorKind::UnknownIdentifier(name),
                            offset: start,
                        }),
                    },
                }
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<FunctionExpr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

impl FromStr for FunctionExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pow(base: Complex64, exp: Complex64) -> Complex64 {
    if base.im == 0.0 && exp.im == 0.0 {
        let (b, e) = (base.re, exp.re);
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return real(b.powi(e as i32));
        }
        if b >= 0.0 {
            return real(b.powf(e));
        }
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exp.re > 0.0 { base } else { real(f64::INFINITY) };
    }
    base.powc(exp)
}

fn call(func: Func, z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        let x = z.re;
        return match func {
            Func::Sin => real(x.sin()),
            Func::Cos => real(x.cos()),
            Func::Exp => real(x.exp()),
            Func::Sqrt if x >= 0.0 => real(x.sqrt()),
            Func::Sqrt => Complex64::new(0.0, (-x).sqrt()),
        };
    }
    match func {
        Func::Sin => z.sin(),
        Func::Cos => z.cos(),
        Func::Exp => z.exp(),
        Func::Sqrt => z.sqrt(),
    }
}

fn mul(a: Complex64, b: Complex64) -> Complex64 {
    match (a.im == 0.0, b.im == 0.0) {
        (true, true) => real(a.re * b.re),
        (true, false) => Complex64::new(a.re * b.re, a.re * b.im),
        (false, true) => Complex64::new(a.re * b.re, a.im * b.re),
        (false, false) => a * b,
    }
}

fn div(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        Complex64::new(a.re / b.re, a.im / b.re)
    } else {
        a / b
    }
}

impl FunctionExpr {
    /// Value at `t`. Sub-expressions without `i` are evaluated in real
    /// arithmetic, so their imaginary part is exactly zero.
    pub fn eval(&self, t: f64) -> Result<Complex64, EvalError> {
        Ok(match self {
            FunctionExpr::Num(v) => real(*v),
            FunctionExpr::Pi => real(std::f64::consts::PI),
            FunctionExpr::I => Complex64::new(0.0, 1.0),
            FunctionExpr::T => real(t),
            FunctionExpr::Neg(e) => -e.eval(t)?,
            FunctionExpr::Call(func, e) => call(*func, e.eval(t)?),
            FunctionExpr::Binary(op, l, r) => {
                let (a, b) = (l.eval(t)?, r.eval(t)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => mul(a, b),
                    BinOp::Div => {
                        if b == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::DivisionByZero { t });
                        }
                        div(a, b)
                    }
                    BinOp::Pow => pow(a, b),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            FunctionExpr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            FunctionExpr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            FunctionExpr::Neg(_) => 3,
            FunctionExpr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

/// `eval` as a free function.
pub fn eval_expr(e: &FunctionExpr, t: f64) -> Result<Complex64, EvalError> {
    e.eval(t)
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &FunctionExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the fewest parentheses that parse back to the same tree.
impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionExpr::Num(v) => write!(f, "{v}"),
            FunctionExpr::Pi => f.write_str("pi"),
            FunctionExpr::I => f.write_str("i"),
            FunctionExpr::T => f.write_str("t"),
            FunctionExpr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            FunctionExpr::Call(func, e) => write!(f, "{}({e})", func.name()),
            FunctionExpr::Binary(op, l, r) => {
                let p = self.precedence();
                let (lp, rp) = match op {
                    BinOp::Pow => (l.precedence() < 5, r.precedence() < 3),
                    _ => (l.precedence() < p, r.precedence() <= p),
                };
                write_child(f, l, lp)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                write_child(f, r, rp)
            }
        }
    }
}
