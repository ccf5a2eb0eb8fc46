//! Independent check of written outputs against the run report.
//!
//! Nothing here looks at the expression trees: each recorded output range is
//! re-parsed as Java and evaluated, and must reproduce the original value
//! (or, for string rewrites, the original decoded text) without the value
//! reappearing as a literal.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::report::{FileStatus, RewriteEntry, RunReport, SiteEntry, VerifyStatus};
use crate::emitter::{eval_java_expr, JavaValue};
use crate::site_finder::SiteContext;
use crate::source_model::{lex, TokenKind};

/// Verify every rewritten site of `report` against the files in `out_dir`,
/// recording the verdicts in the report. Returns the number of failures.
pub fn verify_report(report: &mut RunReport, out_dir: &Path) -> usize {
    let support = report.config.support_name.clone();
    let mut failures = 0;
    let mut outputs: BTreeMap<String, Result<String, String>> = BTreeMap::new();

    for file in report
        .files
        .iter_mut()
        .filter(|f| f.status == FileStatus::Ok)
    {
        let out = fs::read_to_string(out_dir.join(&file.file))
            .map_err(|e| format!("cannot read output: {e}"));
        file.verify_relex = Some(out.as_ref().is_ok_and(|t| lex(t).is_ok()));
        file.verify_untouched = match (&out, fs::read_to_string(&file.input_path)) {
            (Ok(out), Ok(input)) => {
                let rws: Vec<&RewriteEntry> = report
                    .rewrites
                    .iter()
                    .filter(|r| r.file == file.file)
                    .collect();
                Some(untouched_matches(&input, out, &rws))
            }
            (Err(_), _) => Some(false),
            (Ok(_), Err(_)) => None,
        };
        if file.verify_relex == Some(false) || file.verify_untouched == Some(false) {
            failures += 1;
        }
        outputs.insert(file.file.clone(), out);
    }

    for rw in &mut report.rewrites {
        let verdict = match outputs.get(&rw.file) {
            Some(Ok(text)) => check_rewrite(text, rw, &support),
            Some(Err(e)) => Err(e.clone()),
            None => Err("file has no output".to_string()),
        };
        set(&mut rw.verify, &mut rw.verify_detail, verdict);
    }

    let rewrite_state: BTreeMap<(String, usize), (VerifyStatus, Option<String>)> = report
        .rewrites
        .iter()
        .map(|r| {
            (
                (r.file.clone(), r.rewrite_index),
                (r.verify, r.verify_detail.clone()),
            )
        })
        .collect();
    for site in &mut report.sites {
        let verdict = match outputs.get(&site.file) {
            Some(Ok(text)) => check_site(text, site, &support).and_then(|()| {
                match rewrite_state.get(&(site.file.clone(), site.rewrite_index)) {
                    Some((VerifyStatus::Pass, _)) => Ok(()),
                    Some((_, detail)) => Err(format!(
                        "enclosing rewrite failed: {}",
                        detail.as_deref().unwrap_or("unknown")
                    )),
                    None => Err("enclosing rewrite missing from report".to_string()),
                }
            }),
            Some(Err(e)) => Err(e.clone()),
            None => Err("file has no output".to_string()),
        };
        if verdict.is_err() {
            failures += 1;
        }
        set(&mut site.verify, &mut site.verify_detail, verdict);
    }
    failures
}

fn set(status: &mut VerifyStatus, detail: &mut Option<String>, verdict: Result<(), String>) {
    match verdict {
        Ok(()) => {
            *status = VerifyStatus::Pass;
            *detail = None;
        }
        Err(e) => {
            *status = VerifyStatus::Fail;
            *detail = Some(e);
        }
    }
}

fn slice(text: &str, start: usize, end: usize) -> Result<&str, String> {
    text.get(start..end)
        .ok_or_else(|| format!("output range {start}..{end} is not valid in the output"))
}

/// Bytes between rewrites must be copied verbatim from the input.
fn untouched_matches(input: &str, output: &str, rewrites: &[&RewriteEntry]) -> bool {
    let mut sorted = rewrites.to_vec();
    sorted.sort_by_key(|r| r.input_start);
    let (mut i, mut o) = (0, 0);
    for r in sorted {
        match (input.get(i..r.input_start), output.get(o..r.output_start)) {
            (Some(a), Some(b)) if a == b => {}
            _ => return false,
        }
        i = r.input_end;
        o = r.output_end;
    }
    input.get(i..) == output.get(o..)
}

fn check_rewrite(text: &str, rw: &RewriteEntry, support: &str) -> Result<(), String> {
    let got = slice(text, rw.output_start, rw.output_end)?;
    match rw.context {
        SiteContext::String => {
            let want = rw
                .original_text
                .as_ref()
                .ok_or("string rewrite without original text")?;
            match eval_java_expr(got, support) {
                Ok(JavaValue::Str(s)) if &s == want => Ok(()),
                Ok(v) => Err(format!(
                    "string rewrite evaluates to {v:?}, expected {want:?}"
                )),
                Err(e) => Err(format!("string rewrite does not parse: {e}")),
            }
        }
        // A host expression must be well formed around the site.
        SiteContext::SqlBlock if got.starts_with(":(") => {
            if got.ends_with(')') {
                Ok(())
            } else {
                Err("host expression is not closed".to_string())
            }
        }
        SiteContext::SqlBlock | SiteContext::Code => Ok(()),
    }
}

fn check_site(text: &str, site: &SiteEntry, support: &str) -> Result<(), String> {
    let got = slice(text, site.output_start, site.output_end)?;
    let want = match site.context {
        SiteContext::String => JavaValue::Str(site.original.to_string()),
        SiteContext::Code | SiteContext::SqlBlock => JavaValue::Int(site.original),
    };
    match eval_java_expr(got, support) {
        Ok(v) if v == want => {}
        Ok(v) => return Err(format!("evaluates to {v:?}, expected {want:?}")),
        Err(e) => return Err(format!("does not parse: {e}")),
    }
    let target = site.original.unsigned_abs();
    if target >= 2 {
        let tokens = lex(got).map_err(|e| e.to_string())?;
        if tokens
            .iter()
            .any(|t| t.kind == TokenKind::IntLiteral && t.int_value() == Some(target))
        {
            return Err(format!(
                "value {target} appears as a literal in the replacement"
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rw(input: (usize, usize), output: (usize, usize)) -> RewriteEntry {
        RewriteEntry {
            file: "f".into(),
            rewrite_index: 0,
            context: SiteContext::Code,
            input_start: input.0,
            input_end: input.1,
            output_start: output.0,
            output_end: output.1,
            replacement: String::new(),
            site_indices: vec![],
            original_text: None,
            verify: VerifyStatus::NotRun,
            verify_detail: None,
        }
    }

    #[test]
    fn untouched_detection() {
        let a = rw((2, 4), (2, 7));
        assert!(untouched_matches("x=50;", "x=(a+b);", &[&a]));
        assert!(!untouched_matches("x=50;", "y=(a+b);", &[&a]));
        assert!(!untouched_matches("x=50;", "x=(a+b);;", &[&a]));
        assert!(untouched_matches("same", "same", &[]));
    }

    #[test]
    fn site_checks() {
        let mut site = SiteEntry {
            file: "f".into(),
            site_index: 0,
            line: 1,
            col: 1,
            context: SiteContext::Code,
            original: 50,
            raw: "50".into(),
            depth: 1,
            replacement: String::new(),
            rewrite_index: 0,
            output_start: 0,
            output_end: 0,
            verify: VerifyStatus::NotRun,
            verify_detail: None,
        };
        let good = "(25*(JSqlj.F(23,7)))";
        site.output_end = good.len();
        assert_eq!(check_site(good, &site, "JSqlj"), Ok(()));
        assert!(check_site("(25*(JSqlj.F(24,7)))", &site, "JSqlj").is_err());
        assert!(check_site("(1*(JSqlj.F(50,51)))", &site, "JSqlj")
            .unwrap_err()
            .contains("literal"));
        site.output_end = 99;
        assert!(check_site(good, &site, "JSqlj").is_err());
    }
}
