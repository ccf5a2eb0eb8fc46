//! Rendering hidden expressions as Java text and splicing them into sources.

mod reparse;

pub use reparse::{eval_java_expr, parse_java_expr, JavaValue, ReparseError};

use std::fmt::Write as _;

use thiserror::Error;

use crate::hider::HiddenExpr;
use crate::site_finder::{LiteralSite, SiteContext};
use crate::source_model::{decode_string, is_java_identifier, Span, Token};

/// Support type name used when none is configured.
pub const DEFAULT_SUPPORT_NAME: &str = "JSqlj";

/// Number-to-text conversion used for digits cut out of string literals.
pub const TO_STRING_CALL: &str = "Integer.toString(";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("`{0}` is not a valid Java identifier")]
    InvalidIdentifier(String),
    #[error("rewrites overlap at bytes {first:?} and {second:?}")]
    Overlap {
        first: std::ops::Range<usize>,
        second: std::ops::Range<usize>,
    },
    #[error("rewrite span {0:?} is outside the source")]
    OutOfBounds(std::ops::Range<usize>),
    #[error("site {0} does not belong to this string literal")]
    ForeignSite(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub span: Span,
    pub replacement: String,
    pub site_indices: Vec<usize>,
    /// Where each site's expression sits inside `replacement`, parallel to
    /// `site_indices`.
    pub site_ranges: Vec<std::ops::Range<usize>>,
}

/// Fully parenthesized infix rendering; `F` calls are qualified by `support`.
pub fn render_expr(expr: &HiddenExpr, support: &str) -> String {
    let mut out = String::new();
    render_into(expr, support, &mut out);
    out
}

fn render_into(expr: &HiddenExpr, support: &str, out: &mut String) {
    let bin = |op: char, l: &HiddenExpr, r: &HiddenExpr, out: &mut String| {
        out.push('(');
        render_into(l, support, out);
        out.push(op);
        render_into(r, support, out);
        out.push(')');
    };
    match expr {
        HiddenExpr::Lit(v) if *v < 0 => {
            let _ = write!(out, "(-{})", v.unsigned_abs());
        }
        HiddenExpr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        HiddenExpr::Neg(x) => {
            out.push_str("(-");
            render_into(x, support, out);
            out.push(')');
        }
        HiddenExpr::Add(l, r) => bin('+', l, r, out),
        HiddenExpr::Mul(l, r) => bin('*', l, r, out),
        HiddenExpr::Mod(l, r) => bin('%', l, r, out),
        HiddenExpr::CallF(a, b) => {
            let _ = write!(out, "({support}.F(");
            render_into(a, support, out);
            out.push(',');
            render_into(b, support, out);
            out.push_str("))");
        }
    }
}

/// `Integer.toString(<expr>)`.
pub fn render_to_string_call(expr: &HiddenExpr, support: &str) -> String {
    format!("{TO_STRING_CALL}{})", render_expr(expr, support))
}

/// Replace the literal's digits. A unary minus in front stays where it is.
pub fn plan_code_rewrite(site: &LiteralSite, expr: &HiddenExpr, support: &str) -> Rewrite {
    let replacement = render_expr(expr, support);
    Rewrite {
        span: site.raw_span,
        site_ranges: std::iter::once(0..replacement.len()).collect(),
        replacement,
        site_indices: vec![site.site_index],
    }
}

/// Replace a literal inside a `#sql` body by the host expression `:( expr )`.
///
/// Literals already inside a `:( ... )` host expression are Java code and get
/// the plain rendering instead.
pub fn plan_sql_block_rewrite(site: &LiteralSite, expr: &HiddenExpr, support: &str) -> Rewrite {
    if site.in_host_expr {
        return plan_code_rewrite(site, expr, support);
    }
    let inner = render_expr(expr, support);
    Rewrite {
        span: site.raw_span,
        site_ranges: std::iter::once(2..2 + inner.len()).collect(),
        replacement: format!(":({inner})"),
        site_indices: vec![site.site_index],
    }
}

/// Split a string literal at its hidden digit runs and rejoin it as a
/// concatenation of literal segments and `Integer.toString(...)` calls.
///
/// `sites` must all lie inside `string_token`, in document order. Empty
/// segments are dropped. `wrap` surrounds the result with parentheses, for
/// positions where a bare `+` chain would bind differently than the literal.
pub fn plan_string_rewrite(
    string_token: &Token,
    sites: &[(&LiteralSite, &HiddenExpr)],
    support: &str,
    wrap: bool,
) -> Result<Rewrite, EmitError> {
    let base = string_token.span.byte_start;
    let lexeme = &string_token.lexeme;
    let mut parts: Vec<(String, bool)> = Vec::new();
    let mut cursor = 1; // after the opening quote
    for (site, expr) in sites {
        if site.context != SiteContext::String || !string_token.span.contains(&site.raw_span) {
            return Err(EmitError::ForeignSite(site.site_index));
        }
        let start = site.raw_span.byte_start - base;
        let end = site.raw_span.byte_end - base;
        if start < cursor {
            return Err(EmitError::ForeignSite(site.site_index));
        }
        if start > cursor {
            parts.push((format!("\"{}\"", &lexeme[cursor..start]), false));
        }
        parts.push((render_to_string_call(expr, support), true));
        cursor = end;
    }
    let close = lexeme.len() - 1;
    if close > cursor {
        parts.push((format!("\"{}\"", &lexeme[cursor..close]), false));
    }
    if parts.is_empty() {
        parts.push(("\"\"".to_string(), false));
    }
    let wrap = wrap && parts.len() > 1;
    let mut replacement = String::from(if wrap { "(" } else { "" });
    let mut site_ranges = Vec::new();
    for (i, (text, is_site)) in parts.iter().enumerate() {
        if i > 0 {
            replacement.push_str(" + ");
        }
        if *is_site {
            site_ranges.push(replacement.len()..replacement.len() + text.len());
        }
        replacement.push_str(text);
    }
    if wrap {
        replacement.push(')');
    }
    Ok(Rewrite {
        span: string_token.span,
        replacement,
        site_indices: sites.iter().map(|(s, _)| s.site_index).collect(),
        site_ranges,
    })
}

/// Whether a string literal at `idx` needs parentheses once it turns into a
/// `+` chain, judged from its significant neighbours.
pub fn string_needs_parens(tokens: &[Token], idx: usize) -> bool {
    let prev = tokens[..idx].iter().rev().find(|t| !t.kind.is_trivia());
    let next = tokens[idx + 1..].iter().find(|t| !t.kind.is_trivia());
    let safe_prev = match prev {
        None => true,
        Some(t) => {
            matches!(
                t.lexeme.as_str(),
                "(" | "," | "=" | "+" | "+=" | "{" | ";" | "?" | ":" | "->" | "}"
            ) || t.is_keyword("return")
        }
    };
    let safe_next = match next {
        None => true,
        Some(t) => matches!(t.lexeme.as_str(), ")" | "," | ";" | "+" | "}" | ":"),
    };
    !(safe_prev && safe_next)
}

/// Output text and where each rewrite landed in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spliced {
    pub text: String,
    /// Output byte ranges, in the order the rewrites were given.
    pub output_ranges: Vec<std::ops::Range<usize>>,
}

/// Apply non-overlapping rewrites; bytes outside the spans are untouched.
pub fn splice(source: &str, rewrites: &[Rewrite]) -> Result<Spliced, EmitError> {
    let mut order: Vec<usize> = (0..rewrites.len()).collect();
    order.sort_by_key(|&i| (rewrites[i].span.byte_start, rewrites[i].span.byte_end));
    for &i in &order {
        let r = rewrites[i].span.range();
        if r.end > source.len()
            || !source.is_char_boundary(r.start)
            || !source.is_char_boundary(r.end)
        {
            return Err(EmitError::OutOfBounds(r));
        }
    }
    for w in order.windows(2) {
        let (a, b) = (&rewrites[w[0]].span, &rewrites[w[1]].span);
        if a.byte_end > b.byte_start {
            return Err(EmitError::Overlap {
                first: a.range(),
                second: b.range(),
            });
        }
    }
    let mut text = String::with_capacity(source.len());
    let mut output_ranges = vec![0..0; rewrites.len()];
    let mut cursor = 0;
    for &i in &order {
        let rw = &rewrites[i];
        text.push_str(&source[cursor..rw.span.byte_start]);
        let start = text.len();
        text.push_str(&rw.replacement);
        output_ranges[i] = start..text.len();
        cursor = rw.span.byte_end;
    }
    text.push_str(&source[cursor..]);
    Ok(Spliced {
        text,
        output_ranges,
    })
}

/// Source of the support class defining `F`.
pub fn emit_support_file(support_name: &str) -> Result<String, EmitError> {
    if !is_java_identifier(support_name) {
        return Err(EmitError::InvalidIdentifier(support_name.to_string()));
    }
    Ok(format!(
        "public final class {n} {{ public static int F(int a, int b) {{ return a % b; }} private {n}() {{}} }}",
        n = support_name
    ))
}

/// Decoded text of a string literal, for reconstruction checks.
pub fn decoded_text(token: &Token) -> Option<String> {
    decode_string(token).ok().map(|d| d.as_string())
}
