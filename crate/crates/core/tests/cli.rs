use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use jsqlj::cli::RunReport;
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn jsqlj(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_jsqlj"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load(path: &Path) -> RunReport {
    RunReport::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e
                .path()
                .strip_prefix(root)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            (rel, fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn corpus_default_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let report = tmp.path().join("r.json");
    let (code, _, err) = jsqlj(&[
        s(&fixtures()),
        "--out",
        s(&out),
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0, "{err}");
    let r = load(&report);

    let mut values: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    for site in &r.sites {
        values.entry(&site.file).or_default().push(site.original);
    }
    assert_eq!(values["TbSel.sqlj"], [14, 9, 4]);
    assert_eq!(values["SpClient.sqlj"], [15000, 20000, 25000]);
    assert_eq!(values["Query.java"], [50, 5000]);
    assert_eq!(values["TbCreate.sqlj"], [10, 20, 25000, 100, 77, 310]);
    assert_eq!(values["TbCursor.sqlj"], [310, 84, 310]);

    for f in &r.files {
        assert_eq!(
            f.sites_found,
            f.sites_rewritten + f.sites_skipped,
            "{}",
            f.file
        );
        assert_eq!(f.verify_relex, Some(true));
        assert_eq!(f.verify_untouched, Some(true));
    }
    assert!(r
        .sites
        .iter()
        .all(|s| s.verify == jsqlj::cli::VerifyStatus::Pass));
    assert_eq!(r.summary.verified, Some(true));
    assert_eq!(r.metrics.resilience_l0, Some(1.0));
    assert_eq!(r.metrics.resilience_l1, Some(0.0));

    let support = fs::read_to_string(out.join("JSqlj.java")).unwrap();
    assert_eq!(
        support,
        "public final class JSqlj { public static int F(int a, int b) { return a % b; } private JSqlj() {} }"
    );
}

#[test]
fn report_goes_to_stdout_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stdout, _) = jsqlj(&[s(&fixtures().join("Query.java")), "--out", s(tmp.path())]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["tool"], "jsqlj");
    assert_eq!(v["summary"]["sites_rewritten"], 2);
    assert_eq!(v["sites"][0]["context"], "CODE");
    assert_eq!(v["sites"][0]["verify"], "NOT_RUN");
}

#[test]
fn empty_directory_is_a_clean_run() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    let out = tmp.path().join("out");
    let report = tmp.path().join("r.json");
    let (code, _, _) = jsqlj(&[
        s(&input),
        "--out",
        s(&out),
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let r = load(&report);
    assert!(r.files.is_empty() && r.sites.is_empty() && r.skipped.is_empty());
    assert_eq!(r.metrics.resilience_l0, None);
    assert!(tree(&out).is_empty());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let fx = fixtures();
    for extra in [
        &["--depth", "0"][..],
        &["--support-name", "2bad"],
        &["--targets", "sql,nope"],
        &["--q-max", "1000"],
        &["--bogus-flag"],
    ] {
        let mut args = vec![s(&fx), "--out", s(&out)];
        args.extend_from_slice(extra);
        let (code, _, _) = jsqlj(&args);
        assert_eq!(code, 2, "{extra:?}");
    }
    let (code, _, _) = jsqlj(&[s(&fx), "--out", s(&fx.join("nested"))]);
    assert_eq!(code, 2, "output inside input");
    let (code, _, _) = jsqlj(&[s(&tmp.path().join("missing")), "--out", s(&out)]);
    assert_eq!(code, 2, "missing input");
    assert!(!out.exists());
}

#[test]
fn input_error_exits_1_and_other_files_still_run() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("Bad.java"), "String s = \"never closed;\n").unwrap();
    fs::write(input.join("Good.java"), "int x = 40;\n").unwrap();
    let out = tmp.path().join("out");
    let report = tmp.path().join("r.json");
    let (code, _, err) = jsqlj(&[
        s(&input),
        "--out",
        s(&out),
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("Bad.java"));
    let r = load(&report);
    assert_eq!(r.summary.files_failed, 1);
    assert!(r.files[0]
        .error
        .as_deref()
        .unwrap()
        .contains("unterminated string"));
    assert!(!out.join("Bad.java").exists());
    assert!(fs::read_to_string(out.join("Good.java"))
        .unwrap()
        .contains("JSqlj.F("));
}

#[test]
fn runs_are_deterministic_and_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let report = tmp.path().join(format!("{name}.json"));
        let (code, _, _) = jsqlj(&[
            s(&fx),
            "--out",
            s(&out),
            "--seed",
            seed,
            "--report",
            s(&report),
        ]);
        assert_eq!(code, 0);
        let mut v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
        v["config"]["out"] = Value::Null;
        (tree(&out), v)
    };
    let (a, ra) = run("a", "7");
    let (b, rb) = run("b", "7");
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let (c, _) = run("c", "8");
    assert_ne!(a, c);
}

#[test]
fn verify_catches_a_corrupted_digit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let report = tmp.path().join("r.json");
    let (code, _, _) = jsqlj(&[
        s(&fixtures()),
        "--out",
        s(&out),
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let r = load(&report);
    let victim = r
        .sites
        .iter()
        .find(|x| x.file == "TbSel.sqlj" && x.original == 14)
        .unwrap();

    // `(7*(...` for 14: bump the multiplier.
    let path = out.join("TbSel.sqlj");
    let mut bytes = fs::read(&path).unwrap();
    let digit = victim.output_start + 1;
    assert_eq!(bytes[digit], b'7');
    bytes[digit] = b'8';
    fs::write(&path, bytes).unwrap();

    let again = tmp.path().join("r2.json");
    let (code, _, err) = jsqlj(&[
        "--recheck",
        s(&report),
        "--out",
        s(&out),
        "--report",
        s(&again),
    ]);
    assert_eq!(code, 3, "{err}");
    let r2 = load(&again);
    for site in &r2.sites {
        let failed = site.verify == jsqlj::cli::VerifyStatus::Fail;
        assert_eq!(
            failed,
            site.file == "TbSel.sqlj" && site.site_index == victim.site_index
        );
    }
    assert_eq!(r2.summary.verify_failures, 1);
    assert!(err.contains("TbSel.sqlj"));
}

#[test]
fn verify_without_rewrites_passes_vacuously() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("Plain.java");
    fs::write(&input, "class Plain { int one = 1; }\n").unwrap();
    let out = tmp.path().join("out");
    let report = tmp.path().join("r.json");
    let (code, _, _) = jsqlj(&[
        s(&input),
        "--out",
        s(&out),
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let r = load(&report);
    assert_eq!(r.summary.verified, Some(true));
    assert_eq!(r.summary.sites_skipped, 1);
    assert_eq!(r.support_file, None);
    assert_eq!(
        fs::read(out.join("Plain.java")).unwrap(),
        fs::read(&input).unwrap()
    );
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("jsqlj.cfg");
    fs::write(
        &cfg,
        format!(
            "inputs = {}\nout = out\ndepth = 4\nseed = 1\ntargets = code,string,sql\nsupport_name = Hid\n",
            s(&fixtures().join("TbCreate.sqlj"))
        ),
    )
    .unwrap();
    let report = tmp.path().join("r.json");
    let (code, _, err) = jsqlj(&[
        "--config",
        s(&cfg),
        "--depth",
        "2",
        "--verify",
        "--report",
        s(&report),
    ]);
    assert_eq!(code, 0, "{err}");
    let r = load(&report);
    assert_eq!(r.config.depth, 2);
    assert_eq!(r.config.support_name, "Hid");
    assert!(r
        .sites
        .iter()
        .any(|x| x.context == jsqlj::site_finder::SiteContext::SqlBlock));
    let text = fs::read_to_string(tmp.path().join("out/TbCreate.sqlj")).unwrap();
    assert!(text.contains(":(("));
    assert!(text.contains("Hid.F("));
    assert!(tmp.path().join("out/Hid.java").exists());
}
