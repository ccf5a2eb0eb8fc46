use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::token::{Span, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("{}:{}: `#sql` is not followed by `{{` or `;` before end of file", .0.line, .0.col)]
    MissingBody(Span),
    #[error("{}:{}: `#sql` block is never closed", .0.line, .0.col)]
    Unclosed(Span),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HostMode {
    /// `:name`
    Plain,
    /// `:in name`
    In,
    /// `:out name`
    Out,
    /// `:inout name`
    InOut,
    /// `:( expr )`
    Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostRef {
    pub mode: HostMode,
    /// Variable name, or the raw text between the parentheses for `:( )`.
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqljBlock {
    /// `#sql` through the closing brace.
    pub full_span: Span,
    /// Text strictly inside the braces.
    pub body_span: Span,
    pub host_refs: Vec<HostRef>,
}

/// Result of scanning a token stream for `#sql` constructs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SqljScan {
    pub blocks: Vec<SqljBlock>,
    /// Brace-less `#sql` declarations (`#sql iterator ...;`, `#sql context ...;`).
    pub declarations: Vec<Span>,
}

impl SqljScan {
    /// True when `span` falls inside some `#sql` block or declaration.
    pub fn covers(&self, span: &Span) -> bool {
        self.blocks.iter().any(|b| b.full_span.contains(span))
            || self.declarations.iter().any(|d| d.contains(span))
    }
}

pub fn find_sql_blocks(tokens: &[Token]) -> Result<Vec<SqljBlock>, BlockError> {
    scan_sqlj(tokens).map(|s| s.blocks)
}

pub fn scan_sqlj(tokens: &[Token]) -> Result<SqljScan, BlockError> {
    let mut scan = SqljScan::default();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].kind != TokenKind::SqljHash {
            i += 1;
            continue;
        }
        let hash = &tokens[i];
        // Skip the clause between `#sql` and the body: connection context
        // `[ctx]`, iterator assignment `posCur =`, or a declaration.
        let mut j = i + 1;
        let mut bracket_depth = 0usize;
        let open = loop {
            let Some(t) = tokens.get(j) else {
                return Err(BlockError::MissingBody(hash.span));
            };
            match t.lexeme.as_str() {
                "[" | "(" if t.kind == TokenKind::Punct => bracket_depth += 1,
                "]" | ")" if t.kind == TokenKind::Punct => {
                    bracket_depth = bracket_depth.saturating_sub(1)
                }
                "{" if t.kind == TokenKind::Punct && bracket_depth == 0 => break Some(j),
                ";" if t.kind == TokenKind::Punct && bracket_depth == 0 => break None,
                _ => {}
            }
            j += 1;
        };
        let Some(open) = open else {
            let end = &tokens[j];
            scan.declarations.push(join(&hash.span, &end.span));
            i = j + 1;
            continue;
        };

        let mut depth = 0usize;
        let mut k = open + 1;
        let close = loop {
            let Some(t) = tokens.get(k) else {
                return Err(BlockError::Unclosed(hash.span));
            };
            if t.is_punct("{") {
                depth += 1;
            } else if t.is_punct("}") {
                if depth == 0 {
                    break k;
                }
                depth -= 1;
            }
            k += 1;
        };

        let open_tok = &tokens[open];
        let close_tok = &tokens[close];
        let body_span = Span::new(
            open_tok.span.byte_end,
            close_tok.span.byte_start,
            open_tok.span.line,
            open_tok.span.col + 1,
        );
        scan.blocks.push(SqljBlock {
            full_span: join(&hash.span, &close_tok.span),
            body_span,
            host_refs: host_refs(&tokens[open + 1..close]),
        });
        i = close + 1;
    }
    Ok(scan)
}

fn join(first: &Span, last: &Span) -> Span {
    Span::new(first.byte_start, last.byte_end, first.line, first.col)
}

fn next_significant(tokens: &[Token], from: usize) -> Option<usize> {
    (from..tokens.len()).find(|&i| !tokens[i].kind.is_trivia())
}

fn host_refs(body: &[Token]) -> Vec<HostRef> {
    let mut refs = Vec::new();
    let mut i = 0;
    while i < body.len() {
        if !body[i].is_op(":") {
            i += 1;
            continue;
        }
        let colon = &body[i];
        let Some(n) = next_significant(body, i + 1) else {
            break;
        };
        let t = &body[n];
        if t.is_punct("(") {
            let mut depth = 0usize;
            let mut end = None;
            for (k, tk) in body.iter().enumerate().skip(n) {
                if tk.is_punct("(") {
                    depth += 1;
                } else if tk.is_punct(")") {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(k);
                        break;
                    }
                }
            }
            let Some(end) = end else {
                i = n + 1;
                continue;
            };
            let text: String = body[n + 1..end].iter().map(|t| t.lexeme.as_str()).collect();
            refs.push(HostRef {
                mode: HostMode::Expr,
                text,
                span: join(&colon.span, &body[end].span),
            });
            i = end + 1;
            continue;
        }
        if t.kind == TokenKind::Ident {
            let mode = match t.lexeme.to_ascii_lowercase().as_str() {
                "in" => Some(HostMode::In),
                "out" => Some(HostMode::Out),
                "inout" => Some(HostMode::InOut),
                _ => None,
            };
            if let Some(mode) = mode {
                if let Some(v) =
                    next_significant(body, n + 1).filter(|&v| body[v].kind == TokenKind::Ident)
                {
                    refs.push(HostRef {
                        mode,
                        text: body[v].lexeme.clone(),
                        span: join(&colon.span, &body[v].span),
                    });
                    i = v + 1;
                    continue;
                }
            }
            refs.push(HostRef {
                mode: HostMode::Plain,
                text: t.lexeme.clone(),
                span: join(&colon.span, &t.span),
            });
            i = n + 1;
            continue;
        }
        i += 1;
    }
    refs
}
