use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use super::config::{ConfigError, ObfuscationConfig};
use super::report::{
    ConfigEcho, FileEntry, FileStatus, RewriteEntry, RunReport, SiteEntry, Summary, VerifyStatus,
    TOOL_NAME, TOOL_VERSION,
};
use super::verify::verify_report;
use crate::adversary::{measure, FileSize, HiddenSite};
use crate::emitter::{
    decoded_text, emit_support_file, plan_code_rewrite, plan_sql_block_rewrite,
    plan_string_rewrite, splice, string_needs_parens, Rewrite,
};
use crate::hider::{derive_site_rng, hide_int, HiddenExpr};
use crate::site_finder::{find_sites, LiteralSite, SiteContext, SkippedSite};
use crate::source_model::{lex_bytes, scan_sqlj, Token, TokenKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

const SOURCE_EXTENSIONS: &[&str] = &["sqlj", "java"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFile {
    /// `/`-separated path relative to the input root.
    pub file: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub exit_code: i32,
}

fn absolute(p: &Path) -> PathBuf {
    fs::canonicalize(p)
        .or_else(|_| std::path::absolute(p))
        .unwrap_or_else(|_| p.to_path_buf())
}

/// Expand the configured inputs into a sorted, duplicate-free file list.
pub fn collect_inputs(cfg: &ObfuscationConfig) -> Result<Vec<InputFile>, ConfigError> {
    let invalid = |m: String| ConfigError::Invalid(m);
    let out = absolute(&cfg.out);
    let mut files = Vec::new();
    for root in &cfg.inputs {
        let meta =
            fs::metadata(root).map_err(|e| invalid(format!("input {}: {e}", root.display())))?;
        let root_abs = absolute(root);
        if meta.is_dir() {
            if out.starts_with(&root_abs) {
                return Err(invalid(format!(
                    "output directory {} lies inside input {}",
                    cfg.out.display(),
                    root.display()
                )));
            }
            for entry in WalkDir::new(root).sort_by_file_name() {
                let entry = entry.map_err(|e| invalid(format!("input {}: {e}", root.display())))?;
                let path = entry.path();
                let wanted = entry.file_type().is_file()
                    && path
                        .extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e));
                if !wanted {
                    continue;
                }
                let rel = path
                    .strip_prefix(root)
                    .expect("walkdir yields paths under the root");
                let file = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                files.push(InputFile {
                    file,
                    path: path.to_path_buf(),
                });
            }
        } else {
            if root_abs.parent() == Some(out.as_path()) {
                return Err(invalid(format!(
                    "output for {} would overwrite the input",
                    root.display()
                )));
            }
            let file = root
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .ok_or_else(|| invalid(format!("input {} has no file name", root.display())))?;
            files.push(InputFile {
                file,
                path: root.clone(),
            });
        }
    }
    files.sort_by(|a, b| a.file.cmp(&b.file));
    let support = support_file_name(&cfg.support_name);
    let mut seen = BTreeSet::new();
    for f in &files {
        if !seen.insert(f.file.as_str()) {
            return Err(invalid(format!(
                "two inputs map to the same output `{}`",
                f.file
            )));
        }
        if f.file == support {
            return Err(invalid(format!(
                "input `{}` collides with the support file",
                f.file
            )));
        }
    }
    Ok(files)
}

pub fn support_file_name(name: &str) -> String {
    format!("{name}.java")
}

/// Everything produced for one input file.
#[derive(Debug, Clone)]
pub struct FileWork {
    pub entry: FileEntry,
    pub output: Option<String>,
    pub sites: Vec<SiteEntry>,
    pub rewrites: Vec<RewriteEntry>,
    pub skipped: Vec<SkippedSite>,
    pub exprs: Vec<(usize, HiddenExpr)>,
}

struct Processed {
    output: String,
    sites: Vec<SiteEntry>,
    rewrites: Vec<RewriteEntry>,
    skipped: Vec<SkippedSite>,
    exprs: Vec<(usize, HiddenExpr)>,
}

enum FileFailure {
    Input(String),
    Internal(String),
}

/// Run lex, site finding, hiding and splicing on one source.
pub fn process_source(
    file: &str,
    input_path: &str,
    source: &[u8],
    cfg: &ObfuscationConfig,
) -> FileWork {
    let mut entry = FileEntry {
        file: file.to_string(),
        input_path: input_path.to_string(),
        status: FileStatus::Ok,
        error: None,
        input_bytes: source.len(),
        output_bytes: None,
        sites_found: 0,
        sites_rewritten: 0,
        sites_skipped: 0,
        verify_relex: None,
        verify_untouched: None,
    };
    match process_inner(file, source, cfg) {
        Ok(p) => {
            entry.output_bytes = Some(p.output.len());
            entry.sites_rewritten = p.sites.len();
            entry.sites_skipped = p.skipped.len();
            entry.sites_found = p.sites.len() + p.skipped.len();
            FileWork {
                entry,
                output: Some(p.output),
                sites: p.sites,
                rewrites: p.rewrites,
                skipped: p.skipped,
                exprs: p.exprs,
            }
        }
        Err(fail) => {
            let (status, msg) = match fail {
                FileFailure::Input(m) => (FileStatus::InputError, m),
                FileFailure::Internal(m) => (FileStatus::InternalError, m),
            };
            entry.status = status;
            entry.error = Some(msg);
            FileWork {
                entry,
                output: None,
                sites: vec![],
                rewrites: vec![],
                skipped: vec![],
                exprs: vec![],
            }
        }
    }
}

fn process_inner(
    file: &str,
    source: &[u8],
    cfg: &ObfuscationConfig,
) -> Result<Processed, FileFailure> {
    let input = |e: &dyn std::fmt::Display| FileFailure::Input(e.to_string());
    let internal = |e: &dyn std::fmt::Display| FileFailure::Internal(e.to_string());

    let tokens = lex_bytes(source).map_err(|e| input(&e))?;
    let text = std::str::from_utf8(source).expect("lexer accepted the bytes as UTF-8");
    let sqlj = scan_sqlj(&tokens).map_err(|e| input(&e))?;
    let scan = find_sites(file, &tokens, &sqlj, &cfg.sites).map_err(|e| input(&e))?;

    let mut exprs = Vec::with_capacity(scan.sites.len());
    for site in &scan.sites {
        let mut rng = derive_site_rng(cfg.hide.seed, file, site.site_index as u64);
        let expr = hide_int(site.value, &cfg.hide, &mut rng)
            .map_err(|e| internal(&format!("site {}: {e}", site.site_index)))?;
        exprs.push(expr);
    }

    let support = cfg.support_name.as_str();
    let mut rewrites: Vec<(Rewrite, SiteContext, Option<String>)> = Vec::new();
    let mut strings: BTreeMap<usize, Vec<(&LiteralSite, &HiddenExpr)>> = BTreeMap::new();
    for (site, expr) in scan.sites.iter().zip(&exprs) {
        match site.context {
            SiteContext::Code => {
                rewrites.push((plan_code_rewrite(site, expr, support), site.context, None))
            }
            SiteContext::SqlBlock => rewrites.push((
                plan_sql_block_rewrite(site, expr, support),
                site.context,
                None,
            )),
            SiteContext::String => {
                let host = site.host_string_span.ok_or_else(|| {
                    internal(&format!(
                        "string site {} has no host literal",
                        site.site_index
                    ))
                })?;
                strings
                    .entry(host.byte_start)
                    .or_default()
                    .push((site, expr));
            }
        }
    }
    for (start, group) in strings {
        let idx = string_token_at(&tokens, start)
            .ok_or_else(|| internal(&format!("no string literal at byte {start}")))?;
        let tok = &tokens[idx];
        let rw = plan_string_rewrite(tok, &group, support, string_needs_parens(&tokens, idx))
            .map_err(|e| internal(&e))?;
        rewrites.push((rw, SiteContext::String, decoded_text(tok)));
    }
    rewrites.sort_by_key(|(rw, ..)| rw.span.byte_start);

    let plain: Vec<Rewrite> = rewrites.iter().map(|(rw, ..)| rw.clone()).collect();
    let spliced = splice(text, &plain).map_err(|e| internal(&e))?;

    let by_index: BTreeMap<usize, &LiteralSite> =
        scan.sites.iter().map(|s| (s.site_index, s)).collect();
    let mut sites = Vec::new();
    let mut entries = Vec::new();
    for (ri, ((rw, ctx, original_text), out)) in
        rewrites.into_iter().zip(&spliced.output_ranges).enumerate()
    {
        for (&si, range) in rw.site_indices.iter().zip(&rw.site_ranges) {
            let site = by_index[&si];
            sites.push(SiteEntry {
                file: file.to_string(),
                site_index: si,
                line: site.raw_span.line,
                col: site.raw_span.col,
                context: site.context,
                original: site.value,
                raw: text[site.raw_span.range()].to_string(),
                depth: cfg.hide.depth,
                replacement: rw.replacement[range.clone()].to_string(),
                rewrite_index: ri,
                output_start: out.start + range.start,
                output_end: out.start + range.end,
                verify: VerifyStatus::NotRun,
                verify_detail: None,
            });
        }
        entries.push(RewriteEntry {
            file: file.to_string(),
            rewrite_index: ri,
            context: ctx,
            input_start: rw.span.byte_start,
            input_end: rw.span.byte_end,
            output_start: out.start,
            output_end: out.end,
            replacement: rw.replacement,
            site_indices: rw.site_indices,
            original_text,
            verify: VerifyStatus::NotRun,
            verify_detail: None,
        });
    }
    sites.sort_by_key(|s| s.site_index);

    Ok(Processed {
        output: spliced.text,
        sites,
        rewrites: entries,
        skipped: scan.skipped,
        exprs: scan.sites.iter().map(|s| s.site_index).zip(exprs).collect(),
    })
}

fn string_token_at(tokens: &[Token], byte_start: usize) -> Option<usize> {
    let idx = tokens.partition_point(|t| t.span.byte_start < byte_start);
    tokens
        .get(idx)
        .filter(|t| t.span.byte_start == byte_start && t.kind == TokenKind::StringLiteral)
        .map(|_| idx)
}

fn process_file(input: &InputFile, cfg: &ObfuscationConfig) -> FileWork {
    let input_path = input.path.display().to_string();
    match fs::read(&input.path) {
        Ok(bytes) => process_source(&input.file, &input_path, &bytes, cfg),
        Err(e) => {
            let mut work = process_source(&input.file, &input_path, &[], cfg);
            work.entry.status = FileStatus::InputError;
            work.entry.error = Some(format!("cannot read input: {e}"));
            work.output = None;
            work
        }
    }
}

fn write_output(out_dir: &Path, rel: &str, text: &str) -> std::io::Result<()> {
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)
}

/// The whole batch: collect, transform, write, measure and optionally verify.
pub fn run(cfg: &ObfuscationConfig) -> Result<RunOutcome, ConfigError> {
    cfg.validate()?;
    let support_source =
        emit_support_file(&cfg.support_name).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let inputs = collect_inputs(cfg)?;

    let mut works: Vec<FileWork> = inputs.par_iter().map(|f| process_file(f, cfg)).collect();

    if let Err(e) = fs::create_dir_all(&cfg.out) {
        return Err(ConfigError::Invalid(format!(
            "cannot create output directory {}: {e}",
            cfg.out.display()
        )));
    }
    for w in &mut works {
        if let Some(text) = &w.output {
            if let Err(e) = write_output(&cfg.out, &w.entry.file, text) {
                w.entry.status = FileStatus::InputError;
                w.entry.error = Some(format!("cannot write output: {e}"));
                w.output = None;
            }
        }
    }

    let any_rewrite = works
        .iter()
        .any(|w| w.output.is_some() && !w.rewrites.is_empty());
    let mut support_file = None;
    if any_rewrite {
        let name = support_file_name(&cfg.support_name);
        if let Err(e) = fs::write(cfg.out.join(&name), &support_source) {
            return Err(ConfigError::Invalid(format!(
                "cannot write support file: {e}"
            )));
        }
        support_file = Some(name);
    }

    let live: Vec<&FileWork> = works.iter().filter(|w| w.output.is_some()).collect();
    let hidden: Vec<HiddenSite<'_>> = live
        .iter()
        .flat_map(|w| {
            w.exprs.iter().map(|(i, e)| HiddenSite {
                file: &w.entry.file,
                site_index: *i,
                expr: e,
            })
        })
        .collect();
    let sizes: Vec<FileSize<'_>> = live
        .iter()
        .map(|w| FileSize {
            file: &w.entry.file,
            input_bytes: w.entry.input_bytes,
            output_bytes: w.entry.output_bytes.unwrap_or(0),
        })
        .collect();
    let metrics = measure(&hidden, &sizes);

    let mut report = RunReport {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        config: ConfigEcho::from_config(cfg),
        files: Vec::new(),
        sites: Vec::new(),
        rewrites: Vec::new(),
        skipped: Vec::new(),
        metrics,
        support_file,
        summary: Summary::default(),
    };
    for w in works {
        report.files.push(w.entry);
        report.sites.extend(w.sites);
        report.rewrites.extend(w.rewrites);
        report.skipped.extend(w.skipped);
    }

    if cfg.verify {
        verify_report(&mut report, &cfg.out);
    }
    let exit_code = finish_summary(&mut report);
    Ok(RunOutcome { report, exit_code })
}

/// Fill in the summary and compute the exit code. Verification failure
/// outranks input errors.
pub fn finish_summary(report: &mut RunReport) -> i32 {
    let files_failed = report
        .files
        .iter()
        .filter(|f| f.status != FileStatus::Ok)
        .count();
    let site_failures = report
        .sites
        .iter()
        .filter(|s| s.verify == VerifyStatus::Fail)
        .count();
    let file_failures = report
        .files
        .iter()
        .filter(|f| f.verify_relex == Some(false) || f.verify_untouched == Some(false))
        .count();
    let verify_failures = site_failures + file_failures;
    let ran = report.files.iter().any(|f| f.verify_relex.is_some())
        || report
            .sites
            .iter()
            .any(|s| s.verify != VerifyStatus::NotRun)
        || report.config.verify;
    let exit_code = if verify_failures > 0 {
        EXIT_VERIFY
    } else if files_failed > 0 {
        EXIT_INPUT
    } else {
        EXIT_OK
    };
    report.summary = Summary {
        files_total: report.files.len(),
        files_failed,
        sites_found: report.files.iter().map(|f| f.sites_found).sum(),
        sites_rewritten: report.sites.len(),
        sites_skipped: report.skipped.len(),
        rewrites: report.rewrites.len(),
        verified: ran.then_some(verify_failures == 0),
        verify_failures,
        exit_code,
    };
    exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ObfuscationConfig {
        ObfuscationConfig::new(vec![PathBuf::from("unused")], "unused-out")
    }

    #[test]
    fn process_source_rewrites_and_reports() {
        let src = b"int x = 50; String s = \"a 310 b\"; if (y > 1) {}";
        let w = process_source("A.java", "A.java", src, &cfg());
        assert_eq!(w.entry.status, FileStatus::Ok);
        assert_eq!(w.entry.sites_rewritten, 2);
        assert_eq!(w.entry.sites_skipped, 1);
        assert_eq!(w.entry.sites_found, 3);
        let out = w.output.unwrap();
        for s in &w.sites {
            assert_eq!(&out[s.output_start..s.output_end], s.replacement);
        }
        for r in &w.rewrites {
            assert_eq!(&out[r.output_start..r.output_end], r.replacement);
        }
        assert_eq!(w.rewrites[1].original_text.as_deref(), Some("a 310 b"));
        assert!(out.ends_with("; if (y > 1) {}"));
    }

    #[test]
    fn lex_errors_fail_the_file() {
        let w = process_source("B.java", "B.java", b"s = \"open", &cfg());
        assert_eq!(w.entry.status, FileStatus::InputError);
        assert!(w.output.is_none());
        let w = process_source("B.sqlj", "B.sqlj", b"#sql { SELECT 1", &cfg());
        assert_eq!(w.entry.status, FileStatus::InputError);
    }

    #[test]
    fn site_rng_is_per_site() {
        let a = process_source("C.java", "C.java", b"f(40); f(40);", &cfg());
        let b = process_source("C.java", "C.java", b"f(40); g(0); f(40);", &cfg());
        assert_ne!(a.sites[0].replacement, a.sites[1].replacement);
        assert_eq!(a.sites[0].replacement, b.sites[0].replacement);
        let c = process_source("D.java", "D.java", b"f(40); f(40);", &cfg());
        assert_ne!(a.sites[0].replacement, c.sites[0].replacement);
    }
}
