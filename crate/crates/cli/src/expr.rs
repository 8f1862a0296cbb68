//! Integrand expressions.
//!
//! Precedence from loosest to tightest: comparisons, `+ -`, `* /`, unary
//! sign, `^`. Everything is left associative except `^`. The exponent of `^`
//! must not depend on any variable.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Abs => x.abs(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    E,
    /// `x1 ..= x9`, stored 1-based.
    Var(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// 1 when the comparison holds, else 0.
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Var(i) => x.get(i - 1).copied().unwrap_or(0.0),
            Expr::Neg(a) => -a.eval(x),
            Expr::Call(f, a) => f.apply(a.eval(x)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Cmp(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                let holds = match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                };
                if holds {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::If(c, a, b) => {
                if c.eval(x) != 0.0 {
                    a.eval(x)
                } else {
                    b.eval(x)
                }
            }
        }
    }

    /// Largest variable index used, or 0 for a constant expression.
    pub fn dimension(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::E => 0,
            Expr::Var(i) => *i,
            Expr::Neg(a) | Expr::Call(_, a) => a.dimension(),
            Expr::Bin(_, a, b) | Expr::Cmp(_, a, b) => a.dimension().max(b.dimension()),
            Expr::If(c, a, b) => c.dimension().max(a.dimension()).max(b.dimension()),
        }
    }
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Cmp(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::If(c, a, b) => write!(f, "if({c}, {a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: expected {}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    End,
}

const OPERAND: &[&str] = &[
    "number",
    "variable",
    "constant",
    "function call",
    "'('",
    "'-'",
];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let v: f64 = src[start..i].parse().map_err(|_| ParseError {
                position: start,
                expected: vec!["number"],
            })?;
            if !v.is_finite() {
                return Err(ParseError {
                    position: start,
                    expected: vec!["finite number"],
                });
            }
            out.push((start, Tok::Num(v)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        let two = src.get(i..i + 2);
        let op = match two {
            Some("<=") => Some("<="),
            Some(">=") => Some(">="),
            Some("==") => Some("=="),
            Some("!=") => Some("!="),
            _ => None,
        };
        if let Some(op) = op {
            out.push((start, Tok::Op(op)));
            i += 2;
            continue;
        }
        let tok = match c {
            b'+' => Tok::Op("+"),
            b'-' => Tok::Op("-"),
            b'*' => Tok::Op("*"),
            b'/' => Tok::Op("/"),
            b'^' => Tok::Op("^"),
            b'<' => Tok::Op("<"),
            b'>' => Tok::Op(">"),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                return Err(ParseError {
                    position: start,
                    expected: vec!["operator", "operand"],
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos(),
            expected: expected.to_vec(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::Le,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::Ge,
            Tok::Op("==") => CmpOp::Eq,
            Tok::Op("!=") => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op("-") => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op("+") => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op("^") {
            return Ok(base);
        }
        self.bump();
        let at = self.pos();
        let exp = self.unary()?;
        if exp.dimension() > 0 {
            return Err(ParseError {
                position: at,
                expected: vec!["constant exponent"],
            });
        }
        Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (idx, at) = (self.at, self.pos());
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.comparison()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(&name, at),
            _ => {
                self.at = idx;
                self.fail(OPERAND)
            }
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        match name {
            "pi" => return Ok(Expr::Pi),
            "e" => return Ok(Expr::E),
            "if" => {
                self.expect(Tok::LParen, "'('")?;
                let c = self.comparison()?;
                self.expect(Tok::Comma, "','")?;
                let a = self.comparison()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.comparison()?;
                self.expect(Tok::RParen, "')'")?;
                return Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)));
            }
            _ => {}
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, "'('")?;
            let a = self.comparison()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Expr::Call(func, Box::new(a)));
        }
        let var = name
            .strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|i| (1..=9).contains(i) && name.len() == 2);
        match var {
            Some(i) => Ok(Expr::Var(i)),
            None => Err(ParseError {
                position: at,
                expected: vec!["variable x1..x9", "pi", "e", "function name"],
            }),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let e = p.comparison()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, x: &[f64]) -> f64 {
        parse_expression(s).unwrap().eval(x)
    }

    #[test]
    fn examples() {
        assert!((eval("sin(2*pi*x1)", &[0.25]) - 1.0).abs() < 1e-15);
        assert!((eval("x1^2", &[0.3]) - 0.09).abs() < 1e-15);
        let err = parse_expression("2*+").unwrap_err();
        assert_eq!(err.position, 3);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("-2^2", &[]), -4.0);
        assert_eq!(eval("2^3^2", &[]), 512.0);
        assert_eq!(eval("1 - 2 - 3", &[]), -4.0);
        assert_eq!(eval("8 / 4 / 2", &[]), 1.0);
        assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval("2^-1", &[]), 0.5);
        assert_eq!(eval("1 + 1 < 3", &[]), 1.0);
        assert_eq!(eval("if(x1 < 0.5, 1, -2)", &[0.7]), -2.0);
        assert_eq!(eval("x1 * x2", &[2.0]), 0.0);
        assert_eq!(eval("1.5e2 + .5", &[]), 150.5);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_expression("x1^x2").unwrap_err().expected,
            vec!["constant exponent"]
        );
        assert_eq!(parse_expression("x10").unwrap_err().position, 0);
        assert_eq!(parse_expression("(1 + 2").unwrap_err().position, 6);
        assert_eq!(parse_expression("sin 1").unwrap_err().position, 4);
        assert_eq!(parse_expression("1 $ 2").unwrap_err().position, 2);
        assert_eq!(parse_expression("").unwrap_err().position, 0);
        assert_eq!(parse_expression("1 2").unwrap_err().position, 2);
        assert!(parse_expression("1e999").is_err());
    }

    #[test]
    fn dimension() {
        assert_eq!(parse_expression("1 + pi").unwrap().dimension(), 0);
        assert_eq!(parse_expression("x3 * x1").unwrap().dimension(), 3);
    }
}
