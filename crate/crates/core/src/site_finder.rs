//! Locating integer literals eligible for hiding.
//!
//! Candidates are numbered in document order across all three contexts,
//! whether or not a context is targeted, so a site keeps its index (and
//! therefore its random stream) when the target set or threshold changes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hider::INT_MAX;
use crate::source_model::{
    decode_string, is_plain_decimal, DecodeError, HostMode, Span, SqljScan, Token, TokenKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SiteContext {
    Code,
    String,
    SqlBlock,
}

impl fmt::Display for SiteContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SiteContext::Code => "CODE",
            SiteContext::String => "STRING",
            SiteContext::SqlBlock => "SQL_BLOCK",
        })
    }
}

/// Which contexts to rewrite. Parsed from a comma list of `code`, `string`, `sql`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Targets {
    pub code: bool,
    pub string: bool,
    pub sql: bool,
}

impl Default for Targets {
    fn default() -> Self {
        Targets {
            code: true,
            string: true,
            sql: false,
        }
    }
}

impl Targets {
    pub fn includes(&self, ctx: SiteContext) -> bool {
        match ctx {
            SiteContext::Code => self.code,
            SiteContext::String => self.string,
            SiteContext::SqlBlock => self.sql,
        }
    }
}

impl FromStr for Targets {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut t = Targets {
            code: false,
            string: false,
            sql: false,
        };
        for part in s.split(',').map(str::trim) {
            match part {
                "code" => t.code = true,
                "string" => t.string = true,
                "sql" => t.sql = true,
                "" => {}
                other => {
                    return Err(format!(
                        "unknown target `{other}` (expected code, string, sql)"
                    ))
                }
            }
        }
        if !(t.code || t.string || t.sql) {
            return Err("target set is empty".into());
        }
        Ok(t)
    }
}

impl fmt::Display for Targets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [
            (self.code, "code"),
            (self.string, "string"),
            (self.sql, "sql"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteOptions {
    pub targets: Targets,
    pub min_abs: u64,
}

impl Default for SiteOptions {
    fn default() -> Self {
        SiteOptions {
            targets: Targets::default(),
            min_abs: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralSite {
    pub file_id: String,
    pub site_index: usize,
    pub value: i64,
    /// The digits to replace.
    pub raw_span: Span,
    pub context: SiteContext,
    /// The enclosing string literal, for `STRING` sites.
    pub host_string_span: Option<Span>,
    /// A `SQL_BLOCK` literal that sits inside a `:( ... )` host expression
    /// and is therefore Java code, not SQL.
    pub in_host_expr: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkipReason {
    #[serde(rename = "SKIPPED_WIDTH")]
    Width,
    #[serde(rename = "SKIPPED_MIN_ABS")]
    MinAbs,
    #[serde(rename = "SKIPPED_FORBIDDEN_POSITION")]
    ForbiddenPosition,
    /// Digit runs such as `007`, whose decimal rendering would drop the zeros.
    #[serde(rename = "SKIPPED_LEADING_ZERO")]
    LeadingZero,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::Width => "SKIPPED_WIDTH",
            SkipReason::MinAbs => "SKIPPED_MIN_ABS",
            SkipReason::ForbiddenPosition => "SKIPPED_FORBIDDEN_POSITION",
            SkipReason::LeadingZero => "SKIPPED_LEADING_ZERO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSite {
    #[serde(rename = "file")]
    pub file_id: String,
    pub site_index: usize,
    pub raw: String,
    pub span: Span,
    pub context: SiteContext,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteScan {
    pub sites: Vec<LiteralSite>,
    pub skipped: Vec<SkippedSite>,
}

impl SiteScan {
    pub fn found(&self) -> usize {
        self.sites.len() + self.skipped.len()
    }
}

struct Candidate {
    raw: String,
    span: Span,
    context: SiteContext,
    value: Option<u64>,
    leading_zero: bool,
    forbidden: bool,
    host_string_span: Option<Span>,
    in_host_expr: bool,
}

pub fn find_sites(
    file_id: &str,
    tokens: &[Token],
    sqlj: &SqljScan,
    opts: &SiteOptions,
) -> Result<SiteScan, DecodeError> {
    let forbidden = forbidden_tokens(tokens, sqlj);
    let mut candidates = Vec::new();

    for (i, tok) in tokens.iter().enumerate() {
        let block = sqlj.blocks.iter().find(|b| b.full_span.contains(&tok.span));
        if let Some(block) = block {
            if !block.body_span.contains(&tok.span) || tok.kind != TokenKind::IntLiteral {
                continue;
            }
            // SQL numerals are decimal; a leading zero does not mean octal there.
            let all_digits = tok.lexeme.bytes().all(|b| b.is_ascii_digit());
            if !all_digits {
                continue;
            }
            let in_host_expr = block
                .host_refs
                .iter()
                .any(|h| h.mode == HostMode::Expr && h.span.contains(&tok.span));
            let value = if in_host_expr {
                tok.int_value()
            } else {
                tok.lexeme.parse().ok()
            };
            candidates.push(Candidate {
                raw: tok.lexeme.clone(),
                span: tok.span,
                context: SiteContext::SqlBlock,
                value,
                leading_zero: !is_plain_decimal(&tok.lexeme),
                forbidden: false,
                host_string_span: None,
                in_host_expr,
            });
            continue;
        }
        if sqlj.covers(&tok.span) {
            continue;
        }
        match tok.kind {
            TokenKind::IntLiteral => candidates.push(Candidate {
                raw: tok.lexeme.clone(),
                span: tok.span,
                context: SiteContext::Code,
                value: tok.int_value(),
                leading_zero: false,
                forbidden: forbidden.contains(&i),
                host_string_span: None,
                in_host_expr: false,
            }),
            TokenKind::StringLiteral => {
                for run in string_digit_runs(tok)? {
                    candidates.push(Candidate {
                        forbidden: forbidden.contains(&i),
                        ..run
                    });
                }
            }
            _ => {}
        }
    }

    let mut scan = SiteScan::default();
    for (site_index, c) in candidates.into_iter().enumerate() {
        if !opts.targets.includes(c.context) {
            continue;
        }
        let reason = match c.value {
            None => Some(SkipReason::Width),
            Some(v) if v > INT_MAX as u64 => Some(SkipReason::Width),
            Some(_) if c.leading_zero => Some(SkipReason::LeadingZero),
            Some(_) if c.forbidden => Some(SkipReason::ForbiddenPosition),
            Some(v) if v < opts.min_abs => Some(SkipReason::MinAbs),
            Some(_) => None,
        };
        match reason {
            Some(reason) => scan.skipped.push(SkippedSite {
                file_id: file_id.to_string(),
                site_index,
                raw: c.raw,
                span: c.span,
                context: c.context,
                reason,
            }),
            None => scan.sites.push(LiteralSite {
                file_id: file_id.to_string(),
                site_index,
                value: c.value.expect("checked above") as i64,
                raw_span: c.span,
                context: c.context,
                host_string_span: c.host_string_span,
                in_host_expr: c.in_host_expr,
            }),
        }
    }
    Ok(scan)
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Maximal ASCII digit runs in the decoded string not touching a letter,
/// digit or underscore.
fn string_digit_runs(tok: &Token) -> Result<Vec<Candidate>, DecodeError> {
    let decoded = decode_string(tok)?;
    let text = &decoded.text;
    let mut runs = Vec::new();
    let mut i = 0;
    while i < text.len() {
        if !text[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < text.len() && text[i].is_ascii_digit() {
            i += 1;
        }
        let before_ok = start == 0 || !is_word_char(text[start - 1]);
        let after_ok = i == text.len() || !is_word_char(text[i]);
        if !(before_ok && after_ok) {
            continue;
        }
        let digits: String = text[start..i].iter().collect();
        let raw_start = decoded.offsets[start].start;
        let raw_end = decoded.offsets[i - 1].end;
        let col_offset = tok.lexeme[..raw_start].chars().count() as u32;
        runs.push(Candidate {
            raw: tok.lexeme[raw_start..raw_end].to_string(),
            span: Span::new(
                tok.span.byte_start + raw_start,
                tok.span.byte_start + raw_end,
                tok.span.line,
                tok.span.col + col_offset,
            ),
            context: SiteContext::String,
            value: digits.parse().ok(),
            leading_zero: !is_plain_decimal(&digits),
            forbidden: false,
            host_string_span: Some(tok.span),
            in_host_expr: false,
        });
    }
    Ok(runs)
}

/// Indices of tokens whose literals must stay compile-time constants or
/// `int`-free: `case` labels, annotation arguments and element defaults,
/// array dimensions in `new T[n]`, and initializers of `byte`/`short`/`char`
/// variables (plus later plain assignments to them).
fn forbidden_tokens(tokens: &[Token], sqlj: &SqljScan) -> HashSet<usize> {
    let sig: Vec<usize> = (0..tokens.len())
        .filter(|&i| !tokens[i].kind.is_trivia() && !sqlj.covers(&tokens[i].span))
        .collect();
    let t = |k: usize| -> Option<&Token> { sig.get(k).map(|&i| &tokens[i]) };
    let mut marked = HashSet::new();
    let mut narrow_names: HashSet<&str> = HashSet::new();

    // Marks sig[from..] up to (not including) a terminator at nesting depth 0.
    let mark_until = |from: usize, stop: &dyn Fn(&Token) -> bool, marked: &mut HashSet<usize>| {
        let mut depth = 0i32;
        let mut k = from;
        while let Some(tok) = t(k) {
            if depth == 0 && stop(tok) {
                break;
            }
            if tok.kind == TokenKind::Punct {
                match tok.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth < 0 {
                            break;
                        }
                    }
                    _ => {}
                }
            }
            marked.insert(sig[k]);
            k += 1;
        }
        k
    };
    // Marks the bracket group opening at sig[open]; returns the index after it.
    let mark_group = |open: usize, marked: &mut HashSet<usize>| {
        let end = mark_until(open + 1, &|_| false, marked);
        end + 1
    };

    let mut k = 0;
    while let Some(tok) = t(k) {
        if tok.is_keyword("case") {
            mark_until(k + 1, &|x| x.is_op(":") || x.is_op("->"), &mut marked);
        } else if tok.is_keyword("default")
            && !t(k + 1).is_some_and(|x| x.is_op(":") || x.is_op("->"))
        {
            mark_until(k + 1, &|x| x.is_punct(";"), &mut marked);
        } else if tok.is_punct("@") && t(k + 1).is_some_and(|x| x.kind == TokenKind::Ident) {
            let mut j = k + 2;
            while t(j).is_some_and(|x| x.is_punct("."))
                && t(j + 1).is_some_and(|x| x.kind == TokenKind::Ident)
            {
                j += 2;
            }
            if t(j).is_some_and(|x| x.is_punct("(")) {
                mark_group(j, &mut marked);
            }
        } else if tok.is_keyword("new") {
            let mut j = k + 1;
            let mut angle = 0i32;
            while let Some(x) = t(j) {
                match (x.kind, x.lexeme.as_str()) {
                    (TokenKind::Ident | TokenKind::Keyword, _) => {}
                    (TokenKind::Punct, ".") | (TokenKind::Punct, ",")
                        if angle > 0 || x.is_punct(".") => {}
                    (TokenKind::Operator, "<") => angle += 1,
                    (TokenKind::Operator, ">") => angle -= 1,
                    (TokenKind::Operator, ">>") => angle -= 2,
                    (TokenKind::Operator, "?") if angle > 0 => {}
                    _ => break,
                }
                j += 1;
            }
            let narrow = t(k + 1).is_some_and(is_narrow_type);
            while t(j).is_some_and(|x| x.is_punct("[")) {
                j = mark_group(j, &mut marked);
            }
            if narrow && t(j).is_some_and(|x| x.is_punct("{")) {
                mark_group(j, &mut marked);
            }
        } else if is_narrow_type(tok) && !t(k.wrapping_sub(1)).is_some_and(|x| x.is_punct("(")) {
            // Declarations: `byte a = 1, b[] = {2}, c;`
            let mut j = k + 1;
            while t(j).is_some_and(|x| x.is_punct("[") || x.is_punct("]")) {
                j += 1;
            }
            while let Some(name) = t(j).filter(|x| x.kind == TokenKind::Ident) {
                narrow_names.insert(name.lexeme.as_str());
                j += 1;
                while t(j).is_some_and(|x| x.is_punct("[") || x.is_punct("]")) {
                    j += 1;
                }
                if t(j).is_some_and(|x| x.is_op("=")) {
                    j = mark_until(j + 1, &|x| x.is_punct(",") || x.is_punct(";"), &mut marked);
                }
                if t(j).is_some_and(|x| x.is_punct(",")) {
                    j += 1;
                } else {
                    break;
                }
            }
        }
        k += 1;
    }

    // Later assignments to narrow variables: `b = 5;`, `arr[i] = 5;`.
    let mut k = 0;
    while let Some(tok) = t(k) {
        if tok.kind == TokenKind::Ident
            && narrow_names.contains(tok.lexeme.as_str())
            && !t(k.wrapping_sub(1)).is_some_and(|x| x.is_punct("."))
        {
            let mut j = k + 1;
            while t(j).is_some_and(|x| x.is_punct("[")) {
                let mut depth = 0;
                while let Some(x) = t(j) {
                    if x.is_punct("[") {
                        depth += 1;
                    } else if x.is_punct("]") {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    j += 1;
                }
                j += 1;
            }
            if t(j).is_some_and(|x| x.is_op("=")) {
                mark_until(j + 1, &|x| x.is_punct(";") || x.is_punct(","), &mut marked);
            }
        }
        k += 1;
    }
    marked
}

fn is_narrow_type(tok: &Token) -> bool {
    tok.kind == TokenKind::Keyword && matches!(tok.lexeme.as_str(), "byte" | "short" | "char")
}
