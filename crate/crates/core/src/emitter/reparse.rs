//! Parser and evaluator for the Java expression subset the emitter writes.
//!
//! Used to check emitted text independently of the tree it was rendered
//! from: standard Java precedence, `int` arithmetic with overflow treated as
//! an error, string concatenation, `Integer.toString` and the support
//! type's `F`, which computes `a % b` as the emitted support class does.

use thiserror::Error;

use crate::source_model::{decode_literal_body, lex, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReparseError {
    #[error("lex error: {0}")]
    Lex(#[from] LexError),
    #[error("unexpected {found} at byte {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("unexpected end of expression")]
    Eof,
    #[error("unsupported call `{0}`")]
    UnknownCall(String),
    #[error("type error: {0}")]
    Type(&'static str),
    #[error("int overflow")]
    Overflow,
    #[error("division by zero")]
    DivByZero,
    #[error("bad string literal")]
    BadString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JavaValue {
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JavaExpr {
    Int(i64),
    Str(String),
    Neg(Box<JavaExpr>),
    Binary(char, Box<JavaExpr>, Box<JavaExpr>),
    Call(String, Vec<JavaExpr>),
}

pub fn parse_java_expr(text: &str) -> Result<JavaExpr, ReparseError> {
    let tokens: Vec<Token> = lex(text)?
        .into_iter()
        .filter(|t| !t.kind.is_trivia())
        .collect();
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(unexpected(t));
    }
    Ok(e)
}

pub fn eval_java_expr(text: &str, support: &str) -> Result<JavaValue, ReparseError> {
    eval(&parse_java_expr(text)?, support)
}

fn unexpected(t: &Token) -> ReparseError {
    ReparseError::Unexpected {
        found: format!("{} `{}`", t.kind, t.lexeme),
        offset: t.span.byte_start,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ReparseError> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or(ReparseError::Eof)?;
        self.pos += 1;
        Ok(t)
    }

    fn eat(&mut self, kind: TokenKind, lexeme: &str) -> bool {
        if self.peek().is_some_and(|t| t.is(kind, lexeme)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, lexeme: &str) -> Result<(), ReparseError> {
        let t = self.next()?;
        if t.is_punct(lexeme) {
            Ok(())
        } else {
            Err(unexpected(&t))
        }
    }

    fn binary_level(
        &mut self,
        ops: &[char],
        operand: fn(&mut Self) -> Result<JavaExpr, ReparseError>,
    ) -> Result<JavaExpr, ReparseError> {
        let mut left = operand(self)?;
        loop {
            let op = match self.peek() {
                Some(t) if t.kind == TokenKind::Operator && t.lexeme.len() == 1 => {
                    t.lexeme.chars().next().filter(|c| ops.contains(c))
                }
                _ => None,
            };
            let Some(op) = op else { return Ok(left) };
            self.pos += 1;
            let right = operand(self)?;
            left = JavaExpr::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn expr(&mut self) -> Result<JavaExpr, ReparseError> {
        self.binary_level(&['+', '-'], Self::term)
    }

    fn term(&mut self) -> Result<JavaExpr, ReparseError> {
        self.binary_level(&['*', '/', '%'], Self::unary)
    }

    fn unary(&mut self) -> Result<JavaExpr, ReparseError> {
        if self.eat(TokenKind::Operator, "-") {
            return Ok(JavaExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(TokenKind::Operator, "+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<JavaExpr, ReparseError> {
        let t = self.next()?;
        match t.kind {
            TokenKind::IntLiteral => t
                .int_value()
                .and_then(|v| i64::try_from(v).ok())
                .map(JavaExpr::Int)
                .ok_or(ReparseError::Overflow),
            TokenKind::StringLiteral => {
                let d = decode_literal_body(&t.lexeme).map_err(|_| ReparseError::BadString)?;
                Ok(JavaExpr::Str(d.as_string()))
            }
            TokenKind::Punct if t.lexeme == "(" => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            TokenKind::Ident => {
                let mut name = t.lexeme.clone();
                while self.eat(TokenKind::Punct, ".") {
                    let part = self.next()?;
                    if part.kind != TokenKind::Ident {
                        return Err(unexpected(&part));
                    }
                    name.push('.');
                    name.push_str(&part.lexeme);
                }
                self.expect_punct("(")?;
                let mut args = Vec::new();
                if !self.eat(TokenKind::Punct, ")") {
                    loop {
                        args.push(self.expr()?);
                        if self.eat(TokenKind::Punct, ")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                Ok(JavaExpr::Call(name, args))
            }
            _ => Err(unexpected(&t)),
        }
    }
}

fn int_checked(v: Option<i64>) -> Result<JavaValue, ReparseError> {
    match v {
        Some(v) if (i32::MIN as i64..=i32::MAX as i64).contains(&v) => Ok(JavaValue::Int(v)),
        _ => Err(ReparseError::Overflow),
    }
}

pub fn eval(expr: &JavaExpr, support: &str) -> Result<JavaValue, ReparseError> {
    let int = |e: &JavaExpr| -> Result<i64, ReparseError> {
        match eval(e, support)? {
            JavaValue::Int(v) => Ok(v),
            JavaValue::Str(_) => Err(ReparseError::Type("expected int, found String")),
        }
    };
    match expr {
        JavaExpr::Int(v) => int_checked(Some(*v)),
        JavaExpr::Str(s) => Ok(JavaValue::Str(s.clone())),
        JavaExpr::Neg(x) => int_checked(int(x)?.checked_neg()),
        JavaExpr::Binary('+', l, r) => match (eval(l, support)?, eval(r, support)?) {
            (JavaValue::Int(a), JavaValue::Int(b)) => int_checked(a.checked_add(b)),
            (a, b) => Ok(JavaValue::Str(format!("{}{}", show(&a), show(&b)))),
        },
        JavaExpr::Binary(op, l, r) => {
            let (a, b) = (int(l)?, int(r)?);
            match op {
                '-' => int_checked(a.checked_sub(b)),
                '*' => int_checked(a.checked_mul(b)),
                '/' | '%' if b == 0 => Err(ReparseError::DivByZero),
                '/' => int_checked(a.checked_div(b)),
                '%' => int_checked(a.checked_rem(b)),
                _ => unreachable!("parser only builds + - * / %"),
            }
        }
        JavaExpr::Call(name, args) => {
            let f_name = format!("{support}.F");
            match (name.as_str(), args.as_slice()) {
                (n, [a, b]) if n == f_name => {
                    let (a, b) = (int(a)?, int(b)?);
                    if b == 0 {
                        return Err(ReparseError::DivByZero);
                    }
                    int_checked(a.checked_rem(b))
                }
                ("Integer.toString", [x]) => Ok(JavaValue::Str(int(x)?.to_string())),
                _ => Err(ReparseError::UnknownCall(name.clone())),
            }
        }
    }
}

fn show(v: &JavaValue) -> String {
    match v {
        JavaValue::Int(i) => i.to_string(),
        JavaValue::Str(s) => s.clone(),
    }
}
