//! Lossless lexer for Java sources with embedded `#sql` constructs.
//!
//! Every byte of the input belongs to exactly one token, whitespace and
//! comments included, so concatenating the lexemes reproduces the input.

use thiserror::Error;

use super::token::{is_java_keyword, Span, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{line}:{col}: unterminated string literal")]
    UnterminatedString { line: u32, col: u32 },
    #[error("{line}:{col}: unterminated character literal")]
    UnterminatedChar { line: u32, col: u32 },
    #[error("{line}:{col}: unterminated block comment")]
    UnterminatedComment { line: u32, col: u32 },
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    InvalidUtf8 { offset: usize },
}

/// Operators, longest first so that maximal munch picks the right one.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>", "->", "::", "+", "-", "*", "/", "%", "=", "<", ">",
    "!", "~", "?", ":", "&", "|", "^",
];

/// Lex raw bytes. Fails on invalid UTF-8 instead of panicking.
pub fn lex_bytes(source: &[u8]) -> Result<Vec<Token>, LexError> {
    let text = std::str::from_utf8(source).map_err(|e| LexError::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    lex(text)
}

pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let (start, line, col) = (self.pos, self.line, self.col);
            let kind = self.scan(c, line, col)?;
            let lexeme = self.src[start..self.pos].to_string();
            self.tokens.push(Token {
                kind,
                lexeme,
                span: Span::new(start, self.pos, line, col),
            });
        }
        Ok(self.tokens)
    }

    fn scan(&mut self, c: char, line: u32, col: u32) -> Result<TokenKind, LexError> {
        if c.is_whitespace() {
            self.bump_while(char::is_whitespace);
            return Ok(TokenKind::Whitespace);
        }
        if c == '/' && self.peek_at(1) == Some('/') {
            self.bump_while(|c| c != '\n');
            return Ok(TokenKind::Comment);
        }
        if c == '/' && self.peek_at(1) == Some('*') {
            self.bump();
            self.bump();
            loop {
                match self.bump() {
                    None => return Err(LexError::UnterminatedComment { line, col }),
                    Some('*') if self.peek() == Some('/') => {
                        self.bump();
                        return Ok(TokenKind::Comment);
                    }
                    Some(_) => {}
                }
            }
        }
        if c == '"' {
            self.bump();
            loop {
                match self.bump() {
                    None | Some('\n') => return Err(LexError::UnterminatedString { line, col }),
                    Some('\\') => {
                        // The escape is validated by `decode_string`; here we only
                        // need to skip the escaped character. A backslash-newline
                        // is still an unterminated string.
                        match self.peek() {
                            None | Some('\n') => {
                                return Err(LexError::UnterminatedString { line, col })
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                    Some('"') => return Ok(TokenKind::StringLiteral),
                    Some(_) => {}
                }
            }
        }
        if c == '\'' {
            // Lenient: SQL string literals inside `#sql` bodies are single-quoted
            // and may hold several characters or line breaks.
            self.bump();
            loop {
                match self.bump() {
                    None => return Err(LexError::UnterminatedChar { line, col }),
                    Some('\\') => {
                        if self.bump().is_none() {
                            return Err(LexError::UnterminatedChar { line, col });
                        }
                    }
                    Some('\'') => return Ok(TokenKind::CharLiteral),
                    Some(_) => {}
                }
            }
        }
        if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            return Ok(self.scan_number());
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let start = self.pos;
            self.bump_while(|c| c.is_alphanumeric() || c == '_' || c == '$');
            let word = &self.src[start..self.pos];
            return Ok(if is_java_keyword(word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            });
        }
        if c == '#' {
            self.bump();
            let rest = self.rest();
            let sql_follows = rest.starts_with("sql")
                && !rest[3..]
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$');
            return Ok(if sql_follows {
                TokenKind::SqljHash
            } else {
                TokenKind::Punct
            });
        }
        if self.rest().starts_with("...") {
            for _ in 0..3 {
                self.bump();
            }
            return Ok(TokenKind::Punct);
        }
        if "(){}[];,.@".contains(c) {
            self.bump();
            return Ok(TokenKind::Punct);
        }
        if let Some(op) = OPERATORS.iter().find(|op| self.rest().starts_with(**op)) {
            for _ in 0..op.len() {
                self.bump();
            }
            return Ok(TokenKind::Operator);
        }
        // Anything else (stray backslash, unusual symbols) is kept as a
        // one-character punctuation token so lexing never fails on it.
        self.bump();
        Ok(TokenKind::Punct)
    }

    /// Numbers: classify as a plain integer literal or as some other numeric
    /// literal (float, suffixed, malformed).
    fn scan_number(&mut self) -> TokenKind {
        let start = self.pos;
        let first = self.peek().unwrap_or('0');
        let second = self.peek_at(1);
        let is_digitish = |c: char| c.is_ascii_alphanumeric() || c == '_';

        if first == '0' && matches!(second, Some('x' | 'X' | 'b' | 'B')) {
            self.bump();
            self.bump();
            let radix = if matches!(second, Some('x' | 'X')) {
                16
            } else {
                2
            };
            self.bump_while(|c| c.is_digit(radix) || c == '_');
            let digits_end = self.pos;
            self.bump_while(is_digitish);
            let digits = &self.src[start + 2..digits_end];
            let clean_end = self.pos == digits_end;
            return if clean_end && !digits.is_empty() && !digits.ends_with('_') {
                TokenKind::IntLiteral
            } else {
                TokenKind::OtherNumber
            };
        }

        self.bump_while(|c| c.is_ascii_digit() || c == '_');
        let mut float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            float = true;
            self.bump();
            self.bump_while(|c| c.is_ascii_digit() || c == '_');
        } else if self.peek() == Some('.')
            && !self
                .peek_at(1)
                .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '.')
        {
            // `1.` is a double literal; `1.foo` is not a thing in Java but we
            // leave the dot to the punctuation rule in that case.
            float = true;
            self.bump();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                float = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                self.bump_while(|c| c.is_ascii_digit() || c == '_');
            }
        }
        let body_end = self.pos;
        if matches!(self.peek(), Some('l' | 'L' | 'f' | 'F' | 'd' | 'D')) {
            self.bump();
            float = true;
        }
        if float {
            return TokenKind::OtherNumber;
        }
        let body = &self.src[start..body_end];
        let octal_ok = !(body.len() > 1 && body.starts_with('0'))
            || body[1..]
                .chars()
                .all(|c| ('0'..='7').contains(&c) || c == '_');
        if body.ends_with('_') || !octal_ok {
            TokenKind::OtherNumber
        } else {
            TokenKind::IntLiteral
        }
    }
}
