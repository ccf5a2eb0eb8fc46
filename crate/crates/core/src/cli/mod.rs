//! Batch front end: configuration, traversal, the per-file pipeline,
//! verification and the JSON report.

pub mod config;
pub mod report;
pub mod run;
pub mod verify;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::Parser;

pub use config::{resolve, Args, ConfigError, ObfuscationConfig};
pub use report::{RunReport, VerifyStatus};
pub use run::{run, RunOutcome, EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_VERIFY};
pub use verify::verify_report;

/// Parse arguments, run, emit the report and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(saved) = args.recheck.clone() {
        return recheck(saved, args);
    }
    let cfg = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("jsqlj: config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("jsqlj: config error: {e}");
            return EXIT_CONFIG;
        }
    };
    for f in outcome.report.files.iter().filter(|f| f.error.is_some()) {
        eprintln!("jsqlj: {}: {}", f.file, f.error.as_deref().unwrap_or(""));
    }
    emit_report(&outcome.report, cfg.report.as_ref()).unwrap_or(outcome.exit_code)
}

/// Re-verify outputs of an earlier run. Reads the saved report and the
/// `--out` directory; the refreshed report goes to `--report` or stdout.
fn recheck(saved: PathBuf, args: Args) -> i32 {
    let Some(out) = args.out.clone() else {
        eprintln!("jsqlj: config error: --recheck needs --out");
        return EXIT_CONFIG;
    };
    let report = std::fs::read_to_string(&saved)
        .map_err(|e| e.to_string())
        .and_then(|t| RunReport::from_json(&t).map_err(|e| e.to_string()));
    let mut report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("jsqlj: cannot load report {}: {e}", saved.display());
            return EXIT_INPUT;
        }
    };
    verify_report(&mut report, &out);
    let code = run::finish_summary(&mut report);
    for s in report
        .sites
        .iter()
        .filter(|s| s.verify == VerifyStatus::Fail)
    {
        eprintln!(
            "jsqlj: {}:{}:{}: site {} failed: {}",
            s.file,
            s.line,
            s.col,
            s.site_index,
            s.verify_detail.as_deref().unwrap_or("")
        );
    }
    emit_report(&report, args.report.as_ref()).unwrap_or(code)
}

/// Write the report; `Some(code)` if that failed.
fn emit_report(report: &RunReport, path: Option<&PathBuf>) -> Option<i32> {
    let json = report.to_json();
    let written = match path {
        Some(p) => std::fs::write(p, json),
        None => std::io::stdout().lock().write_all(json.as_bytes()),
    };
    match written {
        Ok(()) => None,
        Err(e) => {
            eprintln!("jsqlj: cannot write report: {e}");
            Some(EXIT_INPUT)
        }
    }
}
