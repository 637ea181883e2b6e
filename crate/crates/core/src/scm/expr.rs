//! Expression language for structural equations.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! or    := and ("or" and)*
//! and   := cmp ("and" cmp)*
//! cmp   := sum (("==" | "!=" | "<" | "<=" | ">" | ">=") sum)*
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary ("*" unary)*
//! unary := ("-" | "not") unary | atom
//! atom  := number | "true" | "false" | ident | ident "(" args ")" | "(" or ")"
//! ```
//!
//! Callable names are `and`, `or`, `not`, `min`, `max`, `relu`, `logistic`,
//! `tanh`, `abs` and `ite(cond, then, else)`. Booleans coerce to reals as
//! 0/1 inside arithmetic; reals never coerce to booleans.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    And,
    Or,
    Add,
    Sub,
    Mul,
    Min,
    Max,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Relu,
    Logistic,
    Tanh,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Bool(bool),
    Num(f64),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Apply(Func, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// Static type of an expression. `Unknown` only arises for bare
/// identifiers before their domains are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    Bool,
    Real,
    Unknown,
}

/// Runtime value inside an expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Real(f64),
}

impl Scalar {
    pub fn as_real(self) -> f64 {
        match self {
            Scalar::Bool(b) => f64::from(u8::from(b)),
            Scalar::Real(x) => x,
        }
    }

    fn as_bool(self) -> bool {
        match self {
            Scalar::Bool(b) => b,
            // unreachable after type checking; treat nonzero as true
            Scalar::Real(x) => x != 0.0,
        }
    }
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Func {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Relu => relu(x),
            Func::Logistic => logistic(x),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Relu => "relu",
            Func::Logistic => "logistic",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }

    fn is_call_form(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or | BinaryOp::Min | BinaryOp::Max)
    }

    fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn apply(func: Func, arg: Expr) -> Self {
        Expr::Apply(func, Box::new(arg))
    }

    /// Free variables in order of first appearance.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Bool(_) | Expr::Num(_) => {}
            Expr::Var(name) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            Expr::Unary(_, e) | Expr::Apply(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Ite(c, a, b) => {
                c.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Infer the type, given a lookup for identifier types.
    pub fn infer(&self, var_type: &dyn Fn(&str) -> Type) -> Result<Type> {
        let require_bool = |e: &Expr, ctx: &str| -> Result<()> {
            if e.infer(var_type)? == Type::Real {
                return Err(Error::TypeMismatch(format!(
                    "`{ctx}` applied to real-valued `{e}` (use an explicit comparison)"
                )));
            }
            Ok(())
        };
        Ok(match self {
            Expr::Bool(_) => Type::Bool,
            Expr::Num(_) => Type::Real,
            Expr::Var(name) => var_type(name),
            Expr::Unary(UnaryOp::Not, e) => {
                require_bool(e, "not")?;
                Type::Bool
            }
            Expr::Unary(UnaryOp::Neg, e) | Expr::Apply(_, e) => {
                e.infer(var_type)?;
                Type::Real
            }
            Expr::Binary(op, a, b) => match op {
                BinaryOp::And | BinaryOp::Or => {
                    require_bool(a, op.symbol())?;
                    require_bool(b, op.symbol())?;
                    Type::Bool
                }
                _ if op.is_comparison() => {
                    a.infer(var_type)?;
                    b.infer(var_type)?;
                    Type::Bool
                }
                _ => {
                    a.infer(var_type)?;
                    b.infer(var_type)?;
                    Type::Real
                }
            },
            Expr::Ite(c, a, b) => {
                require_bool(c, "ite")?;
                match (a.infer(var_type)?, b.infer(var_type)?) {
                    (Type::Bool, Type::Bool) => Type::Bool,
                    (Type::Real, _) | (_, Type::Real) => Type::Real,
                    _ => Type::Unknown,
                }
            }
        })
    }

    /// Evaluate with a name lookup. Identifiers the lookup does not know
    /// evaluate to `Real(NaN)`.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<Scalar>) -> Scalar {
        match self {
            Expr::Bool(b) => Scalar::Bool(*b),
            Expr::Num(x) => Scalar::Real(*x),
            Expr::Var(name) => lookup(name).unwrap_or(Scalar::Real(f64::NAN)),
            Expr::Unary(op, e) => unary(*op, e.eval(lookup)),
            Expr::Binary(op, a, b) => binary(*op, a.eval(lookup), b.eval(lookup)),
            Expr::Apply(f, e) => Scalar::Real(f.apply(e.eval(lookup).as_real())),
            Expr::Ite(c, a, b) => {
                if c.eval(lookup).as_bool() {
                    a.eval(lookup)
                } else {
                    b.eval(lookup)
                }
            }
        }
    }

    pub(crate) fn resolve(&self, slot: &dyn Fn(&str) -> Option<usize>) -> Result<Resolved> {
        Ok(match self {
            Expr::Bool(b) => Resolved::Const(Scalar::Bool(*b)),
            Expr::Num(x) => Resolved::Const(Scalar::Real(*x)),
            Expr::Var(name) => Resolved::Slot(slot(name).ok_or_else(|| Error::UndeclaredVariable(name.clone()))?),
            Expr::Unary(op, e) => Resolved::Unary(*op, Box::new(e.resolve(slot)?)),
            Expr::Binary(op, a, b) => Resolved::Binary(*op, Box::new(a.resolve(slot)?), Box::new(b.resolve(slot)?)),
            Expr::Apply(f, e) => Resolved::Apply(*f, Box::new(e.resolve(slot)?)),
            Expr::Ite(c, a, b) => Resolved::Ite(
                Box::new(c.resolve(slot)?),
                Box::new(a.resolve(slot)?),
                Box::new(b.resolve(slot)?),
            ),
        })
    }
}

fn unary(op: UnaryOp, v: Scalar) -> Scalar {
    match op {
        UnaryOp::Not => Scalar::Bool(!v.as_bool()),
        UnaryOp::Neg => Scalar::Real(-v.as_real()),
    }
}

fn binary(op: BinaryOp, a: Scalar, b: Scalar) -> Scalar {
    use BinaryOp::*;
    match op {
        And => Scalar::Bool(a.as_bool() && b.as_bool()),
        Or => Scalar::Bool(a.as_bool() || b.as_bool()),
        Add => Scalar::Real(a.as_real() + b.as_real()),
        Sub => Scalar::Real(a.as_real() - b.as_real()),
        Mul => Scalar::Real(a.as_real() * b.as_real()),
        Min => Scalar::Real(a.as_real().min(b.as_real())),
        Max => Scalar::Real(a.as_real().max(b.as_real())),
        Eq => Scalar::Bool(a.as_real() == b.as_real()),
        Ne => Scalar::Bool(a.as_real() != b.as_real()),
        Lt => Scalar::Bool(a.as_real() < b.as_real()),
        Le => Scalar::Bool(a.as_real() <= b.as_real()),
        Gt => Scalar::Bool(a.as_real() > b.as_real()),
        Ge => Scalar::Bool(a.as_real() >= b.as_real()),
    }
}

/// Expression with identifiers bound to value slots.
#[derive(Debug, Clone)]
pub(crate) enum Resolved {
    Const(Scalar),
    Slot(usize),
    Unary(UnaryOp, Box<Resolved>),
    Binary(BinaryOp, Box<Resolved>, Box<Resolved>),
    Apply(Func, Box<Resolved>),
    Ite(Box<Resolved>, Box<Resolved>, Box<Resolved>),
}

impl Resolved {
    pub(crate) fn eval(&self, slots: &[Scalar]) -> Scalar {
        match self {
            Resolved::Const(v) => *v,
            Resolved::Slot(i) => slots[*i],
            Resolved::Unary(op, e) => unary(*op, e.eval(slots)),
            Resolved::Binary(op, a, b) => binary(*op, a.eval(slots), b.eval(slots)),
            Resolved::Apply(f, e) => Scalar::Real(f.apply(e.eval(slots).as_real())),
            Resolved::Ite(c, a, b) => {
                if c.eval(slots).as_bool() {
                    a.eval(slots)
                } else {
                    b.eval(slots)
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Num(x) => {
                if *x < 0.0 {
                    write!(f, "({x:?})")
                } else {
                    write!(f, "{x:?}")
                }
            }
            Expr::Var(name) => f.write_str(name),
            Expr::Unary(UnaryOp::Not, e) => write!(f, "not({e})"),
            Expr::Unary(UnaryOp::Neg, e) => write!(f, "-({e})"),
            Expr::Binary(op, a, b) if op.is_call_form() => write!(f, "{}({a}, {b})", op.symbol()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Apply(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
        }
    }
}

// ── Lexer ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::EqEq => f.write_str("'=='"),
            Tok::Ne => f.write_str("'!='"),
            Tok::Lt => f.write_str("'<'"),
            Tok::Le => f.write_str("'<='"),
            Tok::Gt => f.write_str("'>'"),
            Tok::Ge => f.write_str("'>='"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'=' | b'!' | b'<' | b'>' => {
                let eq_follows = bytes.get(i + 1) == Some(&b'=');
                let tok = match (c, eq_follows) {
                    (b'=', true) => Tok::EqEq,
                    (b'!', true) => Tok::Ne,
                    (b'<', true) => Tok::Le,
                    (b'>', true) => Tok::Ge,
                    (b'<', false) => Tok::Lt,
                    (b'>', false) => Tok::Gt,
                    _ => {
                        return Err(Error::Syntax {
                            offset: start + 1,
                            expected: "'='".into(),
                            found: describe_byte(bytes.get(i + 1)),
                        })
                    }
                };
                if eq_follows {
                    i += 1;
                }
                out.push((tok, start));
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme = &text[start..i];
                let value: f64 = lexeme.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: "number".into(),
                    found: format!("`{lexeme}`"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    expected: "expression".into(),
                    found: format!("'{ch}'"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn describe_byte(b: Option<&u8>) -> String {
    match b {
        Some(b) => format!("'{}'", *b as char),
        None => "end of input".into(),
    }
}

// ── Parser ────────────────────────────────────────────────────────────

const KEYWORDS: &[&str] = &[
    "true", "false", "and", "or", "not", "min", "max", "relu", "logistic", "tanh", "abs", "ite",
];

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
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
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            offset: self.offset(),
            expected: expected.into(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn parse_or(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_and()?;
        while self.is_keyword("or") {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_cmp()?;
        while self.is_keyword("and") {
            self.bump();
            let rhs = self.parse_cmp()?;
            lhs = Expr::binary(BinaryOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_cmp(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_sum()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinaryOp::Eq,
                Tok::Ne => BinaryOp::Ne,
                Tok::Lt => BinaryOp::Lt,
                Tok::Le => BinaryOp::Le,
                Tok::Gt => BinaryOp::Gt,
                Tok::Ge => BinaryOp::Ge,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_sum()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_sum(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_prod()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_prod()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_prod(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Expr::binary(BinaryOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.parse_unary()?)))
            }
            Tok::Ident(s) if s == "not" => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.parse_unary()?)))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        let start = self.pos;
        match self.bump() {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::LParen => {
                let e = self.parse_or()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                _ if *self.peek() == Tok::LParen => self.parse_call(name, offset),
                _ if KEYWORDS.contains(&name.as_str()) => {
                    self.pos = start;
                    Err(self.error("expression"))
                }
                _ => Ok(Expr::Var(name)),
            },
            _ => {
                self.pos = start;
                Err(self.error("expression"))
            }
        }
    }

    fn parse_call(&mut self, name: String, offset: usize) -> Result<Expr> {
        let arity = match name.as_str() {
            "not" | "relu" | "logistic" | "tanh" | "abs" => 1,
            "and" | "or" | "min" | "max" => 2,
            "ite" => 3,
            _ => return Err(Error::UnknownFunction { name, offset }),
        };
        self.expect(Tok::LParen)?;
        let mut args = Vec::with_capacity(arity);
        for i in 0..arity {
            if i > 0 {
                self.expect(Tok::Comma)?;
            }
            args.push(self.parse_or()?);
        }
        self.expect(Tok::RParen)?;
        let mut args = args.into_iter();
        let mut next = || args.next().expect("arity checked");
        Ok(match name.as_str() {
            "not" => Expr::Unary(UnaryOp::Not, Box::new(next())),
            "relu" => Expr::apply(Func::Relu, next()),
            "logistic" => Expr::apply(Func::Logistic, next()),
            "tanh" => Expr::apply(Func::Tanh, next()),
            "abs" => Expr::apply(Func::Abs, next()),
            "ite" => {
                let (c, a, b) = (next(), next(), next());
                Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
            }
            other => {
                let op = match other {
                    "and" => BinaryOp::And,
                    "or" => BinaryOp::Or,
                    "min" => BinaryOp::Min,
                    _ => BinaryOp::Max,
                };
                let (a, b) = (next(), next());
                Expr::binary(op, a, b)
            }
        })
    }
}

/// Parse an expression and run the identifier-independent part of type
/// checking.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let expr = parser.parse_or()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("operator or end of input"));
    }
    expr.infer(&|_| Type::Unknown)?;
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_boolean_call_form() {
        let e = parse_expr("or(not(A), B)").unwrap();
        assert_eq!(e.free_vars(), vec!["A", "B"]);
        let look = |a: bool, b: bool| {
            move |n: &str| match n {
                "A" => Some(Scalar::Bool(a)),
                "B" => Some(Scalar::Bool(b)),
                _ => None,
            }
        };
        assert_eq!(e.eval(&look(true, false)), Scalar::Bool(false));
        assert_eq!(e.eval(&look(false, false)), Scalar::Bool(true));
        assert_eq!(e.eval(&look(true, true)), Scalar::Bool(true));
    }

    #[test]
    fn logistic_construction() {
        let e = parse_expr("logistic(6*(A1 + A2) - 3)").unwrap();
        assert_eq!(e.free_vars(), vec!["A1", "A2"]);
        let v = e.eval(&|n| match n {
            "A1" | "A2" => Some(Scalar::Bool(true)),
            _ => None,
        });
        assert_eq!(v, Scalar::Real(logistic(9.0)));
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        match parse_expr("relu(x") {
            Err(Error::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 6);
                assert_eq!(expected, "')'");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_function() {
        assert!(matches!(
            parse_expr("sqrt(x)"),
            Err(Error::UnknownFunction { ref name, offset: 0 }) if name == "sqrt"
        ));
    }

    #[test]
    fn boolean_op_on_real_is_rejected() {
        assert!(matches!(parse_expr("and(1.5, A)"), Err(Error::TypeMismatch(_))));
        assert!(matches!(parse_expr("not(x + 1)"), Err(Error::TypeMismatch(_))));
        assert!(parse_expr("not(x + 1 > 0)").is_ok());
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a or b and c").unwrap();
        assert_eq!(e.to_string(), "or(a, and(b, c))");
        let e = parse_expr("1 + 2 * 3 < 4 - -x").unwrap();
        assert_eq!(e.to_string(), "((1.0 + (2.0 * 3.0)) < (4.0 - -(x)))");
        let e = parse_expr("-relu(x) * 2").unwrap();
        assert_eq!(e.to_string(), "(-(relu(x)) * 2.0)");
    }

    #[test]
    fn trailing_garbage() {
        assert!(matches!(parse_expr("a b"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expr("a ="), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn exponent_literals() {
        assert_eq!(parse_expr("1e-7").unwrap(), Expr::Num(1e-7));
        assert_eq!(parse_expr("2.5E3").unwrap(), Expr::Num(2500.0));
    }

    #[test]
    fn ite_types() {
        let e = parse_expr("ite(x > 0, x, 0)").unwrap();
        assert_eq!(e.infer(&|_| Type::Real).unwrap(), Type::Real);
        assert!(parse_expr("ite(x + 1, 1, 0)").is_err());
    }
}
