//! Position-faithful lexing of SQLJ/Java sources.
//!
//! No syntax tree is built. Rewriting only needs token spans, so the model
//! is a flat token stream plus the `#sql` blocks found in it.

mod blocks;
mod lexer;
mod strings;
mod token;

pub use blocks::{find_sql_blocks, scan_sqlj, BlockError, HostMode, HostRef, SqljBlock, SqljScan};
pub use lexer::{lex, lex_bytes, LexError};
pub use strings::{decode_literal_body, decode_string, escape_java, DecodeError, DecodedString};
pub use token::{
    is_java_identifier, is_java_keyword, is_plain_decimal, parse_int_lexeme, Span, Token, TokenKind,
};

/// Reassemble source text from a token stream.
pub fn reassemble(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.lexeme.as_str()).collect()
}
