//! The JSON run report. Key names are documented in `docs/report-schema.md`.

use serde::{Deserialize, Serialize};

use super::ObfuscationConfig;
use crate::adversary::MetricsReport;
use crate::site_finder::{SiteContext, SkippedSite};

pub const TOOL_NAME: &str = "jsqlj";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    pub files: Vec<FileEntry>,
    pub sites: Vec<SiteEntry>,
    pub rewrites: Vec<RewriteEntry>,
    pub skipped: Vec<SkippedSite>,
    pub metrics: MetricsReport,
    /// Support class file, relative to the output directory, if written.
    pub support_file: Option<String>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub inputs: Vec<String>,
    pub out: String,
    pub depth: u32,
    pub seed: u64,
    pub targets: String,
    pub min_abs: u64,
    pub b_max: i64,
    pub a_max: i64,
    pub q_max: i64,
    pub support_name: String,
    pub verify: bool,
}

impl ConfigEcho {
    pub fn from_config(cfg: &ObfuscationConfig) -> Self {
        ConfigEcho {
            inputs: cfg.inputs.iter().map(|p| p.display().to_string()).collect(),
            out: cfg.out.display().to_string(),
            depth: cfg.hide.depth,
            seed: cfg.hide.seed,
            targets: cfg.sites.targets.to_string(),
            min_abs: cfg.sites.min_abs,
            b_max: cfg.hide.b_max,
            a_max: cfg.hide.a_max,
            q_max: cfg.hide.q_max,
            support_name: cfg.support_name.clone(),
            verify: cfg.verify,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FileStatus {
    Ok,
    InputError,
    /// Hiding or splicing failed an internal check; the file was not written.
    InternalError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to its input root, `/`-separated. Also the output path
    /// relative to the output directory.
    pub file: String,
    pub input_path: String,
    pub status: FileStatus,
    pub error: Option<String>,
    pub input_bytes: usize,
    pub output_bytes: Option<usize>,
    pub sites_found: usize,
    pub sites_rewritten: usize,
    pub sites_skipped: usize,
    /// Whether the output re-lexed cleanly during verification.
    pub verify_relex: Option<bool>,
    /// Whether the bytes outside rewrites match the input.
    pub verify_untouched: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerifyStatus {
    NotRun,
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteEntry {
    pub file: String,
    pub site_index: usize,
    pub line: u32,
    pub col: u32,
    pub context: SiteContext,
    pub original: i64,
    /// Source text of the digits that were replaced.
    pub raw: String,
    pub depth: u32,
    /// The site's expression as written to the output.
    pub replacement: String,
    pub rewrite_index: usize,
    /// Byte range of `replacement` in the output file.
    pub output_start: usize,
    pub output_end: usize,
    pub verify: VerifyStatus,
    pub verify_detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteEntry {
    pub file: String,
    pub rewrite_index: usize,
    pub context: SiteContext,
    pub input_start: usize,
    pub input_end: usize,
    pub output_start: usize,
    pub output_end: usize,
    pub replacement: String,
    pub site_indices: Vec<usize>,
    /// Decoded content of the original string literal, for `STRING` rewrites.
    pub original_text: Option<String>,
    pub verify: VerifyStatus,
    pub verify_detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub files_total: usize,
    pub files_failed: usize,
    pub sites_found: usize,
    pub sites_rewritten: usize,
    pub sites_skipped: usize,
    pub rewrites: usize,
    pub verified: Option<bool>,
    pub verify_failures: usize,
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
