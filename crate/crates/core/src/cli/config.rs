use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emitter::DEFAULT_SUPPORT_NAME;
use crate::hider::HideParams;
use crate::site_finder::{SiteOptions, Targets};
use crate::source_model::is_java_identifier;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("config file {path}: {message}")]
    File { path: String, message: String },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Command-line flags. Every option may also come from a `--config` file;
/// flags win.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "jsqlj",
    version,
    about = "Hide integer constants in SQLJ and Java sources"
)]
pub struct Args {
    /// Input files or directories (.sqlj and .java files are collected from directories).
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Nesting depth of each hiding chain (number of F calls).
    #[arg(long, value_name = "K")]
    pub depth: Option<u32>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Comma-separated subset of code, string, sql.
    #[arg(long, value_name = "SET")]
    pub targets: Option<String>,
    /// Literals with smaller magnitude are left alone.
    #[arg(long, value_name = "N")]
    pub min_abs: Option<u64>,
    #[arg(long, value_name = "N")]
    pub b_max: Option<i64>,
    #[arg(long, value_name = "N")]
    pub a_max: Option<i64>,
    #[arg(long, value_name = "N")]
    pub q_max: Option<i64>,
    /// Name of the generated support class.
    #[arg(long, value_name = "IDENT")]
    pub support_name: Option<String>,
    /// Write the JSON run report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Check every rewritten site in the written outputs.
    #[arg(long)]
    pub verify: bool,
    /// Re-check existing outputs in --out against a saved report, without rewriting.
    #[arg(long, value_name = "REPORT", conflicts_with = "verify")]
    pub recheck: Option<PathBuf>,
    /// key=value file with defaults for the options above.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObfuscationConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub hide: HideParams,
    pub sites: SiteOptions,
    pub support_name: String,
    pub report: Option<PathBuf>,
    pub verify: bool,
}

impl ObfuscationConfig {
    pub fn new(inputs: Vec<PathBuf>, out: impl Into<PathBuf>) -> Self {
        ObfuscationConfig {
            inputs,
            out: out.into(),
            hide: HideParams::default(),
            sites: SiteOptions::default(),
            support_name: DEFAULT_SUPPORT_NAME.to_string(),
            report: None,
            verify: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.hide.validate().map_err(|e| invalid(e.to_string()))?;
        if !is_java_identifier(&self.support_name) {
            return Err(invalid(format!(
                "support name `{}` is not a valid Java identifier",
                self.support_name
            )));
        }
        if self.inputs.is_empty() {
            return Err(invalid("no input paths given"));
        }
        Ok(())
    }
}

/// Parse `key = value` lines. `#` starts a comment line; keys use either
/// `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key=value", n + 1));
        };
        let key = k.trim().replace('-', "_");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", n + 1));
        }
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

fn apply_file(args: &mut Args, map: BTreeMap<String, String>, base: &Path) -> Result<(), String> {
    let path = |v: &str| base.join(v);
    for (key, v) in map {
        match key.as_str() {
            "inputs" => {
                if args.inputs.is_empty() {
                    args.inputs = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(path)
                        .collect();
                }
            }
            "out" => {
                args.out.get_or_insert_with(|| path(&v));
            }
            "depth" => set(&mut args.depth, num(&key, &v)?),
            "seed" => set(&mut args.seed, num(&key, &v)?),
            "targets" => set(&mut args.targets, v),
            "min_abs" => set(&mut args.min_abs, num(&key, &v)?),
            "b_max" => set(&mut args.b_max, num(&key, &v)?),
            "a_max" => set(&mut args.a_max, num(&key, &v)?),
            "q_max" => set(&mut args.q_max, num(&key, &v)?),
            "support_name" => set(&mut args.support_name, v),
            "report" => {
                args.report.get_or_insert_with(|| path(&v));
            }
            "verify" => {
                args.verify |= match v.as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(format!("`verify`: expected a boolean, found `{v}`")),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
    }
    Ok(())
}

fn set<T>(slot: &mut Option<T>, v: T) {
    slot.get_or_insert(v);
}

/// Merge flags with the optional config file and validate the result.
/// Relative paths in the file resolve against the file's directory.
pub fn resolve(mut args: Args) -> Result<ObfuscationConfig, ConfigError> {
    if let Some(cfg_path) = args.config.clone() {
        let file_err = |message: String| ConfigError::File {
            path: cfg_path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(&cfg_path).map_err(|e| file_err(e.to_string()))?;
        let map = parse_config_text(&text).map_err(file_err)?;
        let base = cfg_path.parent().unwrap_or(Path::new("")).to_path_buf();
        apply_file(&mut args, map, &base).map_err(file_err)?;
    }
    let Some(out) = args.out else {
        return Err(invalid("--out is required"));
    };
    let mut cfg = ObfuscationConfig::new(args.inputs, out);
    let d = HideParams::default();
    cfg.hide = HideParams {
        depth: args.depth.unwrap_or(d.depth),
        seed: args.seed.unwrap_or(d.seed),
        b_max: args.b_max.unwrap_or(d.b_max),
        a_max: args.a_max.unwrap_or(d.a_max),
        q_max: args.q_max.unwrap_or(d.q_max),
    };
    if let Some(t) = args.targets {
        cfg.sites.targets = t.parse::<Targets>().map_err(|e| invalid(e.to_string()))?;
    }
    if let Some(m) = args.min_abs {
        cfg.sites.min_abs = m;
    }
    if let Some(s) = args.support_name {
        cfg.support_name = s;
    }
    cfg.report = args.report;
    cfg.verify = args.verify;
    cfg.validate()?;
    Ok(cfg)
}
