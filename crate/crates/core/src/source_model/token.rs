use std::fmt;

use serde::{Deserialize, Serialize};

/// A byte range in the source, plus the 1-based line/column of its first byte.
///
/// Columns count characters, not bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(byte_start: usize, byte_end: usize, line: u32, col: u32) -> Self {
        Span {
            byte_start,
            byte_end,
            line,
            col,
        }
    }

    pub fn len(&self) -> usize {
        self.byte_end - self.byte_start
    }

    pub fn is_empty(&self) -> bool {
        self.byte_start == self.byte_end
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.byte_start..self.byte_end
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Span) -> bool {
        self.byte_start <= other.byte_start && other.byte_end <= self.byte_end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.byte_start < other.byte_end && other.byte_start < self.byte_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Plain integer literal: decimal, `0x` hex, `0b` binary or `0` octal, no suffix.
    IntLiteral,
    /// Floating point or suffixed (`L`, `f`, `d`) numeric literal. Never a site.
    OtherNumber,
    StringLiteral,
    CharLiteral,
    Operator,
    Punct,
    /// The `#` that introduces a `#sql` construct.
    SqljHash,
    Comment,
    Whitespace,
}

impl TokenKind {
    /// Whitespace and comments.
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident => "IDENT",
            TokenKind::Keyword => "KEYWORD",
            TokenKind::IntLiteral => "INT_LITERAL",
            TokenKind::OtherNumber => "OTHER_NUMBER",
            TokenKind::StringLiteral => "STRING_LITERAL",
            TokenKind::CharLiteral => "CHAR_LITERAL",
            TokenKind::Operator => "OPERATOR",
            TokenKind::Punct => "PUNCT",
            TokenKind::SqljHash => "SQLJ_HASH",
            TokenKind::Comment => "COMMENT",
            TokenKind::Whitespace => "WHITESPACE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_punct(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Punct, lexeme)
    }

    pub fn is_op(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Operator, lexeme)
    }

    pub fn is_keyword(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }

    /// Numeric value of an `IntLiteral` lexeme, using Java radix rules.
    ///
    /// `None` for other kinds, or when the value does not fit in `u64`.
    pub fn int_value(&self) -> Option<u64> {
        if self.kind != TokenKind::IntLiteral {
            return None;
        }
        parse_int_lexeme(&self.lexeme)
    }
}

/// Decode an unsigned Java integer lexeme (underscores allowed).
pub fn parse_int_lexeme(lexeme: &str) -> Option<u64> {
    let cleaned: String = lexeme.chars().filter(|c| *c != '_').collect();
    let (digits, radix) = if let Some(rest) = cleaned
        .strip_prefix("0x")
        .or_else(|| cleaned.strip_prefix("0X"))
    {
        (rest, 16)
    } else if let Some(rest) = cleaned
        .strip_prefix("0b")
        .or_else(|| cleaned.strip_prefix("0B"))
    {
        (rest, 2)
    } else if cleaned.len() > 1 && cleaned.starts_with('0') {
        (&cleaned[1..], 8)
    } else {
        (cleaned.as_str(), 10)
    };
    if digits.is_empty() {
        return None;
    }
    u64::from_str_radix(digits, radix).ok()
}

/// True when the lexeme is a plain decimal numeral without leading zeros.
pub fn is_plain_decimal(lexeme: &str) -> bool {
    !lexeme.is_empty()
        && lexeme.bytes().all(|b| b.is_ascii_digit())
        && (lexeme == "0" || !lexeme.starts_with('0'))
}

pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

pub fn is_java_keyword(word: &str) -> bool {
    JAVA_KEYWORDS.contains(&word)
}

/// Valid Java identifier that is not a reserved word.
pub fn is_java_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$') && !is_java_keyword(name)
}
