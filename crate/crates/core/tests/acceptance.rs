//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use jsqlj::adversary::{fold, AdversaryLevel};
use jsqlj::cli::report::VerifyStatus;
use jsqlj::cli::run::process_source;
use jsqlj::cli::{run, ObfuscationConfig};
use jsqlj::emitter::render_expr;
use jsqlj::hider::{
    derive_site_rng, half_multiplier, hide_int, hide_param_with_modulus, HiddenExpr, HideParams,
    SiteRng, Uniform, INT_MAX, INT_MIN,
};
use jsqlj::source_model::lex;

const AC1_VALUES: usize = 1000;
const AC1_DEPTHS: std::ops::RangeInclusive<u32> = 1..=5;
const AC1_SEEDS: u64 = 10;
const AC1_TIME_LIMIT: Duration = Duration::from_secs(5);
const AC3_PER_FILE_LIMIT: Duration = Duration::from_secs(1);
const AC7_MAX_Q: i64 = 101;
const AC7_RANDOM_PAIRS: usize = 100_000;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The random sample shared by criteria 1 and 6: values with
/// `2 <= |m| <= 2^31 - 1`, both signs.
fn sample_values() -> Vec<i64> {
    let mut rng = SiteRng::from_state(0x5EED_0001);
    (0..AC1_VALUES)
        .map(|i| {
            let m = rng.uniform(2, INT_MAX);
            if i % 2 == 0 {
                m
            } else {
                -m
            }
        })
        .collect()
}

fn sample_exprs() -> Result<Vec<(i64, u32, HiddenExpr)>, String> {
    let mut out = Vec::new();
    for (i, &m) in sample_values().iter().enumerate() {
        for depth in AC1_DEPTHS {
            for seed in 0..AC1_SEEDS {
                let params = HideParams {
                    depth,
                    seed,
                    ..HideParams::default()
                };
                let mut rng = derive_site_rng(seed, "acceptance", i as u64);
                let e =
                    hide_int(m, &params, &mut rng).map_err(|e| format!("hide_int({m}): {e}"))?;
                out.push((m, depth, e));
            }
        }
    }
    Ok(out)
}

fn ac1_semantic_preservation() -> Outcome {
    let start = Instant::now();
    let exprs = match sample_exprs() {
        Ok(e) => e,
        Err(e) => return outcome(false, e),
    };
    let wrong = exprs.iter().filter(|(m, _, e)| e.eval() != Ok(*m)).count();
    let elapsed = start.elapsed();
    outcome(
        wrong == 0 && elapsed < AC1_TIME_LIMIT,
        format!(
            "{} expressions, {wrong} mismatches, {elapsed:.2?} (limit {AC1_TIME_LIMIT:?})",
            exprs.len()
        ),
    )
}

fn ac2_anchors() -> Outcome {
    let p1 = HideParams {
        depth: 1,
        ..HideParams::default()
    };
    let r50 = render_expr(
        &hide_int(50, &p1, &mut derive_site_rng(0, "Query.java", 0)).unwrap(),
        "JSqlj",
    );
    let r5000 = render_expr(
        &hide_int(5000, &p1, &mut derive_site_rng(0, "Query.java", 1)).unwrap(),
        "JSqlj",
    );
    let nest = hide_param_with_modulus(
        183,
        191,
        &mut derive_site_rng(0, "anchor", 0),
        &HideParams::default(),
    )
    .unwrap();
    let rnest = render_expr(&nest, "JSqlj");
    let ok50 = r50.starts_with("(25*(JSqlj.F(");
    let ok5000 = r5000.starts_with("(2500*(JSqlj.F(");
    let ok187 =
        half_multiplier(183, 191) == 187 && rnest.ends_with("*187)%191)") && nest.eval() == Ok(183);
    outcome(
        ok50 && ok5000 && ok187,
        format!("50 -> {r50}; 5000 -> {r5000}; 183 -> {rnest}"),
    )
}

fn expected_sites() -> BTreeMap<&'static str, Vec<i64>> {
    BTreeMap::from([
        ("Query.java", vec![50, 5000]),
        ("SpClient.sqlj", vec![15000, 20000, 25000]),
        ("TbCreate.sqlj", vec![10, 20, 25000, 100, 77, 310]),
        ("TbCursor.sqlj", vec![310, 84, 310]),
        ("TbSel.sqlj", vec![14, 9, 4]),
    ])
}

fn corpus_run(out: &Path, seed: u64, verify: bool) -> jsqlj::cli::RunOutcome {
    let mut cfg = ObfuscationConfig::new(vec![fixtures()], out);
    cfg.hide.seed = seed;
    cfg.verify = verify;
    run(&cfg).expect("corpus config is valid")
}

fn ac3_corpus_round_trip(tmp: &Path) -> Outcome {
    let out = tmp.join("ac3");
    let res = corpus_run(&out, 0, true);
    let r = &res.report;
    let mut got: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    for s in &r.sites {
        got.entry(s.file.as_str()).or_default().push(s.original);
    }
    let sites_ok = got == expected_sites();
    let relex_ok = r
        .files
        .iter()
        .all(|f| fs::read_to_string(out.join(&f.file)).is_ok_and(|t| lex(&t).is_ok()));
    let passed = r
        .sites
        .iter()
        .filter(|s| s.verify == VerifyStatus::Pass)
        .count();

    let cfg = ObfuscationConfig::new(vec![fixtures()], &out);
    let mut slowest = Duration::ZERO;
    for f in &r.files {
        let bytes = fs::read(&f.input_path).unwrap();
        let start = Instant::now();
        let _ = process_source(&f.file, &f.input_path, &bytes, &cfg);
        slowest = slowest.max(start.elapsed());
    }
    outcome(
        res.exit_code == 0 && sites_ok && relex_ok && passed == r.sites.len() && slowest < AC3_PER_FILE_LIMIT,
        format!(
            "exit {}, {} files, sites as expected: {sites_ok}, re-lex clean: {relex_ok}, verified {passed}/{}, slowest file {slowest:.2?}",
            res.exit_code,
            r.files.len(),
            r.sites.len()
        ),
    )
}

fn ac4_adversary_bracket(tmp: &Path) -> Outcome {
    let res = corpus_run(&tmp.join("ac4"), 0, false);
    let m = &res.report.metrics;
    let corpus_ok =
        m.hidden_sites > 0 && m.resilience_l0 == Some(1.0) && m.resilience_l1 == Some(0.0);
    let exprs = match sample_exprs() {
        Ok(e) => e,
        Err(e) => return outcome(false, e),
    };
    let l0 = exprs
        .iter()
        .filter(|(_, _, e)| fold(e, AdversaryLevel::L0).recovered().is_some())
        .count();
    let l1 = exprs
        .iter()
        .filter(|(v, _, e)| fold(e, AdversaryLevel::L1).recovered() == Some(*v))
        .count();
    outcome(
        corpus_ok && l0 == 0 && l1 == exprs.len(),
        format!(
            "corpus: {} sites, L0 recovered {:.0}%, L1 recovered {:.0}%; sample: L0 {l0}/{n}, L1 {l1}/{n}",
            m.hidden_sites,
            100.0 * (1.0 - m.resilience_l0.unwrap_or(f64::NAN)),
            100.0 * (1.0 - m.resilience_l1.unwrap_or(f64::NAN)),
            n = exprs.len()
        ),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
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

fn ac5_determinism(tmp: &Path) -> Outcome {
    let a = corpus_run(&tmp.join("ac5a"), 0, false);
    let b = corpus_run(&tmp.join("ac5b"), 0, false);
    let c = corpus_run(&tmp.join("ac5c"), 1, false);
    let same_tree = read_tree(&tmp.join("ac5a")) == read_tree(&tmp.join("ac5b"));
    let reps = |o: &jsqlj::cli::RunOutcome| -> Vec<String> {
        o.report
            .sites
            .iter()
            .map(|s| s.replacement.clone())
            .collect()
    };
    let differs = reps(&a)
        .iter()
        .zip(reps(&c))
        .filter(|(x, y)| *x != y)
        .count();
    let same_reports = {
        let (mut ra, mut rb) = (a.report.clone(), b.report.clone());
        ra.config.out.clear();
        rb.config.out.clear();
        ra == rb
    };
    outcome(
        same_tree && same_reports && differs > 0,
        format!(
            "identical trees: {same_tree}, identical reports: {same_reports}, replacements changed by seed: {differs}/{}",
            a.report.sites.len()
        ),
    )
}

fn ac6_potency_and_width() -> Outcome {
    let exprs = match sample_exprs() {
        Ok(e) => e,
        Err(e) => return outcome(false, e),
    };
    let mut bad_count = 0;
    let mut outside = 0u64;
    let mut observed = 0u64;
    for (m, depth, e) in &exprs {
        let k = *depth as usize;
        let base = if m.unsigned_abs() % 2 == 0 { 5 } else { 7 };
        // A negative value carries one extra negation node.
        let expected = base + 6 * (k - 1) + usize::from(*m < 0);
        if e.node_count() != expected || e.call_count() != k {
            bad_count += 1;
        }
        let _ = e.eval_observed(&mut |v| {
            observed += 1;
            if !(INT_MIN..=INT_MAX).contains(&v) {
                outside += 1;
            }
        });
    }
    outcome(
        bad_count == 0 && outside == 0,
        format!(
            "{} expressions, {bad_count} with unexpected node counts, {outside}/{observed} intermediates outside 32-bit",
            exprs.len()
        ),
    )
}

fn ac7_modular_identity() -> Outcome {
    // Independent oracle: the inverse of 2 modulo odd q, by search.
    let inverse_of_two = |q: i64| (0..q).find(|x| (2 * x) % q == 1 % q).unwrap();
    let mut exhaustive = 0u64;
    let mut failures = 0u64;
    let params = HideParams::default();
    let mut rng = derive_site_rng(7, "identity", 0);
    for q in (1..=AC7_MAX_Q).step_by(2) {
        let inv = inverse_of_two(q);
        for c in 0..q {
            exhaustive += 1;
            let p = (c * ((q + 1) / 2)) % q;
            let ok = (2 * p) % q == c
                && p == (c * inv) % q
                && half_multiplier(c, q) == p
                && (q < 3
                    || hide_param_with_modulus(c, q, &mut rng, &params)
                        .is_ok_and(|e| e.eval() == Ok(c)));
            if !ok {
                failures += 1;
            }
        }
    }
    let mut draw = SiteRng::from_state(0x1DE7_u64);
    for _ in 0..AC7_RANDOM_PAIRS {
        let q = 2 * draw.uniform(1, (params.q_max - 1) / 2) + 1;
        let c = draw.uniform(0, q - 1);
        let p = half_multiplier(c, q);
        let wide = (c as i128 * ((q as i128 + 1) / 2)) % q as i128;
        if (2 * p) % q != c || p as i128 != wide {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{exhaustive} exhaustive pairs (odd q <= {AC7_MAX_Q}) + {AC7_RANDOM_PAIRS} random pairs, {failures} failures"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        (
            "AC1 semantic preservation",
            Box::new(ac1_semantic_preservation),
        ),
        ("AC2 worked-example anchors", Box::new(ac2_anchors)),
        (
            "AC3 corpus round trip",
            Box::new(|| ac3_corpus_round_trip(tmp.path())),
        ),
        (
            "AC4 adversary bracket",
            Box::new(|| ac4_adversary_bracket(tmp.path())),
        ),
        ("AC5 determinism", Box::new(|| ac5_determinism(tmp.path()))),
        (
            "AC6 potency formula and 32-bit width",
            Box::new(ac6_potency_and_width),
        ),
        ("AC7 modular identity", Box::new(ac7_modular_identity)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
