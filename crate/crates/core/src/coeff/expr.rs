//! Arithmetic expressions in the edge coordinate `x`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt | abs
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("evaluation of `{expr}` at x = {x} is not finite")]
    Evaluation { expr: String, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            end: src.len(),
        };
        let e = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(ExprError::Syntax {
                offset: t.offset,
                message: format!("unexpected {}", t.kind.describe()),
            });
        }
        Ok(e)
    }

    /// Raw evaluation; may return a non-finite value.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(a) => -a.value(x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.value(x), b.value(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => f.apply(a.value(x)),
        }
    }

    /// Evaluation that rejects poles and other non-finite results.
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Evaluation {
                expr: self.to_string(),
                x,
            })
        }
    }

    /// `Some(c)` when the expression does not depend on `x`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.mentions_var() {
            None
        } else {
            Some(self.value(0.0))
        }
    }

    fn mentions_var(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions_var(),
            Expr::Binary(_, a, b) => a.mentions_var() || b.mentions_var(),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Fully parenthesized; numbers print with round-trip precision, so the output
/// reparses to an expression with identical values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
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
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: TokenKind::Num(v),
                    offset: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_owned()),
                    offset: start,
                });
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' => {
                out.push(Token {
                    kind: TokenKind::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                out.push(Token {
                    kind: TokenKind::RParen,
                    offset: start,
                });
                i += 1;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ExprError::Syntax {
                offset: t.offset,
                message: format!("expected `)`, found {}", t.kind.describe()),
            }),
            None => Err(ExprError::Syntax {
                offset: self.end,
                message: "expected `)`, found end of input".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                _ => {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ExprError::UnknownIdentifier { offset, name });
                    };
                    match self.peek() {
                        Some(Token {
                            kind: TokenKind::LParen,
                            ..
                        }) => self.pos += 1,
                        _ => {
                            return Err(ExprError::Syntax {
                                offset: self.offset(),
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            other => Err(ExprError::Syntax {
                offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ev(src: &str, x: f64) -> f64 {
        Expr::parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn constants_and_arithmetic() {
        assert_eq!(ev("1", 3.7), 1.0);
        assert_eq!(ev("x*x", 3.0), 9.0);
        assert_eq!(ev(" 2 ^ 3 ^ 2 ", 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("1.5e2 + 2E-1", 0.0), 150.2);
        assert_eq!(ev("10 - 4 - 3", 0.0), 3.0);
        assert_eq!(ev("12 / 3 / 2", 0.0), 2.0);
    }

    #[test]
    fn matches_reference_closure() {
        let reference = |x: f64| 1.0 + 0.5 * x.sin();
        let e = Expr::parse("1+0.5*sin(x)").unwrap();
        assert_eq!(e.eval(PI / 2.0).unwrap(), 1.5);
        for i in 0..50 {
            let x = -3.0 + 0.17 * i as f64;
            assert_eq!(e.eval(x).unwrap(), reference(x));
        }
        let f = Expr::parse("sqrt(abs(x)) * exp(-x) / (1 + cos(pi*x))").unwrap();
        let g = |x: f64| x.abs().sqrt() * (-x).exp() / (1.0 + (PI * x).cos());
        assert_eq!(f.eval(0.3).unwrap(), g(0.3));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            Expr::parse("1+0.5*sin(x)").unwrap(),
            Expr::parse(" 1 +\t0.5 * sin ( x ) ").unwrap()
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(
            Expr::parse("1 + * 2"),
            Err(ExprError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("(1 + 2"),
            Err(ExprError::Syntax { offset: 6, .. })
        ));
        assert!(matches!(
            Expr::parse("1 $ 2"),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
        assert!(matches!(Expr::parse(""), Err(ExprError::Syntax { offset: 0, .. })));
        assert!(matches!(
            Expr::parse("sin x"),
            Err(ExprError::Syntax { offset: 4, .. })
        ));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            Expr::parse("2*y"),
            Err(ExprError::UnknownIdentifier {
                offset: 2,
                name: "y".into()
            })
        );
    }

    #[test]
    fn pole_is_an_evaluation_error() {
        let e = Expr::parse("1/(x-1)").unwrap();
        assert!(e.eval(0.0).is_ok());
        assert!(matches!(e.eval(1.0), Err(ExprError::Evaluation { .. })));
        assert!(Expr::parse("sqrt(x)").unwrap().eval(-1.0).is_err());
    }

    #[test]
    fn constant_detection() {
        assert_eq!(Expr::parse("2*pi").unwrap().as_constant(), Some(2.0 * PI));
        assert_eq!(Expr::parse("x-x").unwrap().as_constant(), None);
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("x".to_string()),
            (0.0f64..10.0).prop_map(|v| format!("{v}")),
            (1u32..1000).prop_map(|v| format!("{v}e-2")),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/"]))
                    .prop_map(|(a, b, op)| format!("{a} {op} {b}")),
                (inner.clone(), prop::sample::select(vec!["sin", "cos", "abs", "exp"]))
                    .prop_map(|(a, f)| format!("{f}({a})")),
                inner.clone().prop_map(|a| format!("-({a})")),
                inner.clone().prop_map(|a| format!("({a})^2")),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trip(src in arb_expr(), seed in 0u64..1000) {
            let e = Expr::parse(&src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            for k in 0..100 {
                let x = -5.0 + 10.0 * (((seed * 7919 + k * 104_729) % 10_007) as f64) / 10_007.0;
                let (a, b) = (e.value(x), again.value(x));
                if a.is_finite() {
                    prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
                } else {
                    prop_assert_eq!(a.is_nan(), b.is_nan());
                }
            }
        }
    }
}
