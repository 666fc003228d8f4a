//! Row expressions: literals, `datum.<field>` references, arithmetic,
//! comparison and short-circuit logic.
//!
//! Null propagates through every operator except `==` / `!=`, which compare
//! structurally. Division or remainder by zero yields null.

use std::fmt;

use thiserror::Error;

use crate::value::{Row, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("expression syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown field `{0}`")]
    UnknownField(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Value),
    Field(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.or()?;
        match p.peek() {
            Tok::End => Ok(e),
            _ => Err(p.error("unexpected trailing input")),
        }
    }

    /// Field names referenced anywhere in the expression, in first-use order.
    pub fn fields(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Literal(_) => {}
                Expr::Field(f) => {
                    if !out.contains(f) {
                        out.push(f.clone());
                    }
                }
                Expr::Unary(_, a) => walk(a, out),
                Expr::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn eval(&self, row: &Row) -> Result<Value, ExprError> {
        match self {
            Expr::Literal(v) => Ok(v.clone()),
            Expr::Field(f) => row
                .get(f)
                .cloned()
                .ok_or_else(|| ExprError::UnknownField(f.clone())),
            Expr::Unary(op, a) => {
                let a = a.eval(row)?;
                Ok(match (op, &a) {
                    (_, Value::Null) => Value::Null,
                    (UnaryOp::Not, a) => Value::Bool(!a.truthy()),
                    (UnaryOp::Neg, a) => a.as_f64().map(|n| Value::Number(-n)).unwrap_or(Value::Null),
                })
            }
            Expr::Binary(BinaryOp::And, a, b) => {
                let a = a.eval(row)?;
                if a.is_null() {
                    return Ok(Value::Null);
                }
                if !a.truthy() {
                    return Ok(Value::Bool(false));
                }
                let b = b.eval(row)?;
                Ok(if b.is_null() { Value::Null } else { Value::Bool(b.truthy()) })
            }
            Expr::Binary(BinaryOp::Or, a, b) => {
                let a = a.eval(row)?;
                if a.is_null() {
                    return Ok(Value::Null);
                }
                if a.truthy() {
                    return Ok(Value::Bool(true));
                }
                let b = b.eval(row)?;
                Ok(if b.is_null() { Value::Null } else { Value::Bool(b.truthy()) })
            }
            Expr::Binary(op, a, b) => Ok(binary(*op, a.eval(row)?, b.eval(row)?)),
        }
    }
}

fn binary(op: BinaryOp, a: Value, b: Value) -> Value {
    use BinaryOp::*;
    match op {
        Eq => return Value::Bool(structural_eq(&a, &b)),
        Ne => return Value::Bool(!structural_eq(&a, &b)),
        _ => {}
    }
    if a.is_null() || b.is_null() {
        return Value::Null;
    }
    match op {
        Add => match (&a, &b) {
            (Value::String(_), _) | (_, Value::String(_)) => Value::String(format!("{a}{b}")),
            _ => arith(&a, &b, |x, y| Some(x + y)),
        },
        Sub => arith(&a, &b, |x, y| Some(x - y)),
        Mul => arith(&a, &b, |x, y| Some(x * y)),
        Div => arith(&a, &b, |x, y| (y != 0.0).then(|| x / y)),
        Rem => arith(&a, &b, |x, y| (y != 0.0).then(|| x % y)),
        Lt | Le | Gt | Ge => {
            let ord = match (&a, &b) {
                (Value::String(x), Value::String(y)) => x.cmp(y),
                (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
                _ => match (a.as_f64(), b.as_f64()) {
                    (Some(x), Some(y)) => match x.partial_cmp(&y) {
                        Some(o) => o,
                        None => return Value::Bool(false),
                    },
                    _ => return Value::Bool(false),
                },
            };
            Value::Bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        Eq | Ne | And | Or => unreachable!("handled above"),
    }
}

fn arith(a: &Value, b: &Value, f: impl Fn(f64, f64) -> Option<f64>) -> Value {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => f(x, y).map(Value::Number).unwrap_or(Value::Null),
        _ => Value::Null,
    }
}

fn structural_eq(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(Value::String(s)) => write!(f, "{s:?}"),
            Expr::Literal(v) => write!(f, "{v}"),
            Expr::Field(name) => write!(f, "datum.{name}"),
            Expr::Unary(UnaryOp::Not, a) => write!(f, "!({a})"),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "-({a})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Rem => "%",
                    BinaryOp::Eq => "==",
                    BinaryOp::Ne => "!=",
                    BinaryOp::Lt => "<",
                    BinaryOp::Le => "<=",
                    BinaryOp::Gt => ">",
                    BinaryOp::Ge => ">=",
                    BinaryOp::And => "&&",
                    BinaryOp::Or => "||",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    const OPS: [&str; 19] = [
        "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "+", "-", "*", "/", "%", "!",
        "(", ")", ".",
    ];
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text = &src[start..i];
            let n = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(n)));
            continue;
        }
        if c == '"' || c == '\'' {
            let start = i;
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(ExprError::Syntax {
                        offset: start,
                        message: "unterminated string".into(),
                    });
                };
                i += ch.len_utf8();
                if ch == c {
                    break;
                }
                if ch == '\\' {
                    let Some(esc) = src[i..].chars().next() else { continue };
                    i += esc.len_utf8();
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                } else {
                    s.push(ch);
                }
            }
            out.push((start, Tok::Str(s)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        match c {
            '(' => out.push((i, Tok::LParen)),
            ')' => out.push((i, Tok::RParen)),
            '[' => out.push((i, Tok::LBracket)),
            ']' => out.push((i, Tok::RBracket)),
            _ => {
                let Some(op) = OPS.iter().find(|op| src[i..].starts_with(**op)) else {
                    return Err(ExprError::Syntax {
                        offset: i,
                        message: format!("unexpected character `{c}`"),
                    });
                };
                let tok = match *op {
                    "." => Tok::Dot,
                    "===" => Tok::Op("=="),
                    "!==" => Tok::Op("!="),
                    op => Tok::Op(op),
                };
                out.push((i, tok));
                i += op.len();
                continue;
            }
        }
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].1
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.tokens[self.pos].0,
            message: message.to_string(),
        }
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        if let Tok::Op(op) = self.peek() {
            if let Some(found) = ops.iter().find(|o| *o == op) {
                self.next();
                return Some(found);
            }
        }
        None
    }

    fn left_assoc(
        &mut self,
        ops: &[&'static str],
        next: fn(&mut Parser) -> Result<Expr, ExprError>,
    ) -> Result<Expr, ExprError> {
        let mut lhs = next(self)?;
        while let Some(op) = self.eat_op(ops) {
            let rhs = next(self)?;
            let op = match op {
                "||" => BinaryOp::Or,
                "&&" => BinaryOp::And,
                "==" => BinaryOp::Eq,
                "!=" => BinaryOp::Ne,
                "<" => BinaryOp::Lt,
                "<=" => BinaryOp::Le,
                ">" => BinaryOp::Gt,
                ">=" => BinaryOp::Ge,
                "+" => BinaryOp::Add,
                "-" => BinaryOp::Sub,
                "*" => BinaryOp::Mul,
                "/" => BinaryOp::Div,
                _ => BinaryOp::Rem,
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["||"], Parser::and)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["&&"], Parser::equality)
    }

    fn equality(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["==", "!="], Parser::comparison)
    }

    fn comparison(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["<=", ">=", "<", ">"], Parser::additive)
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["+", "-"], Parser::multiplicative)
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        self.left_assoc(&["*", "/", "%"], Parser::unary)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(op) = self.eat_op(&["!", "-"]) {
            let operand = self.unary()?;
            let op = if op == "!" { UnaryOp::Not } else { UnaryOp::Neg };
            return Ok(Expr::Unary(op, Box::new(operand)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            Tok::Num(n) => Ok(Expr::Literal(Value::Number(n))),
            Tok::Str(s) => Ok(Expr::Literal(Value::String(s))),
            Tok::LParen => {
                let e = self.or()?;
                match self.next() {
                    Tok::RParen => Ok(e),
                    _ => Err(self.error("expected `)`")),
                }
            }
            Tok::Ident(id) => match id.as_str() {
                "true" => Ok(Expr::Literal(Value::Bool(true))),
                "false" => Ok(Expr::Literal(Value::Bool(false))),
                "null" => Ok(Expr::Literal(Value::Null)),
                "datum" => match self.next() {
                    Tok::Dot => match self.next() {
                        Tok::Ident(field) => Ok(Expr::Field(field)),
                        _ => Err(self.error("expected field name after `datum.`")),
                    },
                    Tok::LBracket => {
                        let field = match self.next() {
                            Tok::Str(s) => s,
                            _ => return Err(self.error("expected quoted field name")),
                        };
                        match self.next() {
                            Tok::RBracket => Ok(Expr::Field(field)),
                            _ => Err(self.error("expected `]`")),
                        }
                    }
                    _ => Err(self.error("expected `.` or `[` after `datum`")),
                },
                other => Err(ExprError::Syntax {
                    offset: self.tokens[self.pos.saturating_sub(1)].0,
                    message: format!("unknown identifier `{other}`"),
                }),
            },
            _ => Err(self.error("expected an operand")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(pairs: &[(&str, Value)]) -> Row {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn eval(src: &str, r: &Row) -> Value {
        Expr::parse(src).unwrap().eval(r).unwrap()
    }

    #[test]
    fn arithmetic_on_fields() {
        let r = row(&[("v", Value::Number(3.0))]);
        assert_eq!(eval("datum.v * 2", &r), Value::Number(6.0));
        assert_eq!(eval("1 + 2 * 3 - 4 / 2", &r), Value::Number(5.0));
        assert_eq!(eval("(1 + 2) * 3 % 4", &r), Value::Number(1.0));
        assert_eq!(eval("-datum.v", &r), Value::Number(-3.0));
    }

    #[test]
    fn division_by_zero_is_null() {
        let r = row(&[("v", Value::Number(1.0))]);
        assert_eq!(eval("datum.v / 0", &r), Value::Null);
        assert_eq!(eval("datum.v % 0", &r), Value::Null);
    }

    #[test]
    fn logic_and_comparison() {
        let r = row(&[("cat", Value::from("A")), ("v", Value::Number(2.0))]);
        assert_eq!(eval("datum.cat == \"A\" && datum.v > 1", &r), Value::Bool(true));
        assert_eq!(eval("datum.cat != 'A' || datum.v <= 1", &r), Value::Bool(false));
        assert_eq!(eval("!(datum.v >= 2)", &r), Value::Bool(false));
        assert_eq!(eval("datum['cat'] === 'A'", &r), Value::Bool(true));
    }

    #[test]
    fn null_propagates_except_equality() {
        let r = row(&[("n", Value::Null), ("v", Value::Number(1.0))]);
        assert_eq!(eval("datum.n + 1", &r), Value::Null);
        assert_eq!(eval("datum.n > 1", &r), Value::Null);
        assert_eq!(eval("!datum.n", &r), Value::Null);
        assert_eq!(eval("datum.n && true", &r), Value::Null);
        assert_eq!(eval("datum.n == null", &r), Value::Bool(true));
        assert_eq!(eval("datum.v != null", &r), Value::Bool(true));
        // short circuit never looks at the null
        assert_eq!(eval("false && datum.n", &r), Value::Bool(false));
    }

    #[test]
    fn string_concatenation() {
        let r = row(&[("cat", Value::from("A"))]);
        assert_eq!(eval("'x-' + datum.cat", &r), Value::from("x-A"));
    }

    #[test]
    fn unknown_field_errors() {
        let e = Expr::parse("datum.missing + 1").unwrap();
        assert_eq!(e.eval(&Row::new()), Err(ExprError::UnknownField("missing".into())));
        assert_eq!(e.fields(), vec!["missing".to_string()]);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(Expr::parse("datum.v +"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("foo"), Err(ExprError::Syntax { offset: 0, .. })));
        assert!(matches!(Expr::parse("(1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("'abc"), Err(ExprError::Syntax { .. })));
    }
}
