use std::ops::Range;

use thiserror::Error;

use super::token::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("token is {0}, not a string literal")]
    NotAString(TokenKind),
    #[error("ill-formed escape sequence at byte {offset} of string literal")]
    BadEscape { offset: usize },
}

/// Decoded contents of a string literal.
///
/// `offsets[i]` is the byte range, relative to the start of the raw lexeme
/// (opening quote included), that produced the i-th decoded character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedString {
    pub text: Vec<char>,
    pub offsets: Vec<Range<usize>>,
}

impl DecodedString {
    pub fn as_string(&self) -> String {
        self.text.iter().collect()
    }
}

pub fn decode_string(token: &Token) -> Result<DecodedString, DecodeError> {
    if token.kind != TokenKind::StringLiteral {
        return Err(DecodeError::NotAString(token.kind));
    }
    decode_literal_body(&token.lexeme)
}

/// Decode a quoted Java string lexeme (`"..."`, quotes included).
pub fn decode_literal_body(raw: &str) -> Result<DecodedString, DecodeError> {
    let bytes = raw.as_bytes();
    if bytes.len() < 2 || bytes[0] != b'"' || bytes[bytes.len() - 1] != b'"' {
        return Err(DecodeError::BadEscape { offset: 0 });
    }
    let end = raw.len() - 1;
    let mut text = Vec::new();
    let mut offsets = Vec::new();
    let mut i = 1;
    while i < end {
        let c = raw[i..].chars().next().expect("in bounds");
        if c != '\\' {
            text.push(c);
            offsets.push(i..i + c.len_utf8());
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let next = raw[i + 1..end]
            .chars()
            .next()
            .ok_or(DecodeError::BadEscape { offset: start })?;
        let (decoded, len) = match next {
            'b' => ('\u{8}', 2),
            't' => ('\t', 2),
            'n' => ('\n', 2),
            'f' => ('\u{c}', 2),
            'r' => ('\r', 2),
            's' => (' ', 2),
            '"' => ('"', 2),
            '\'' => ('\'', 2),
            '\\' => ('\\', 2),
            '0'..='7' => {
                // Up to three octal digits, the first of which limits the
                // value to \377.
                let max_digits = if next <= '3' { 3 } else { 2 };
                let digits: String = raw[i + 1..end]
                    .chars()
                    .take(max_digits)
                    .take_while(|c| ('0'..='7').contains(c))
                    .collect();
                let v = u32::from_str_radix(&digits, 8).expect("octal digits");
                (char::from_u32(v).expect("<= 0o377"), 1 + digits.len())
            }
            'u' => decode_unicode(raw, i, end)?,
            _ => return Err(DecodeError::BadEscape { offset: start }),
        };
        text.push(decoded);
        offsets.push(start..start + len);
        i = start + len;
    }
    Ok(DecodedString { text, offsets })
}

/// `\uXXXX` (with any number of `u`s), including surrogate pairs.
fn decode_unicode(raw: &str, start: usize, end: usize) -> Result<(char, usize), DecodeError> {
    let unit = |at: usize| -> Result<(u32, usize), DecodeError> {
        let b = raw.as_bytes();
        if at + 1 >= end || b[at] != b'\\' || b[at + 1] != b'u' {
            return Err(DecodeError::BadEscape { offset: at });
        }
        let mut j = at + 1;
        while j < end && b[j] == b'u' {
            j += 1;
        }
        let hex = raw
            .get(j..j + 4)
            .filter(|_| j + 4 <= end)
            .ok_or(DecodeError::BadEscape { offset: at })?;
        let v = u32::from_str_radix(hex, 16).map_err(|_| DecodeError::BadEscape { offset: at })?;
        if !hex.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(DecodeError::BadEscape { offset: at });
        }
        Ok((v, j + 4 - at))
    };
    let (hi, len) = unit(start)?;
    if let Some(c) = char::from_u32(hi) {
        return Ok((c, len));
    }
    if (0xD800..0xDC00).contains(&hi) {
        if let Ok((lo, len2)) = unit(start + len) {
            if (0xDC00..0xE000).contains(&lo) {
                let cp = 0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00);
                if let Some(c) = char::from_u32(cp) {
                    return Ok((c, len + len2));
                }
            }
        }
    }
    // Lone surrogates are legal in Java strings but cannot be represented
    // as text here; refuse rather than silently changing the string.
    Err(DecodeError::BadEscape { offset: start })
}

/// Encode text as the body of a Java string literal (no quotes).
pub fn escape_java(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}
