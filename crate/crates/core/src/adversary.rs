//! Potency, resilience and cost of a hiding run.
//!
//! Resilience is measured against a constant-folding deobfuscator at two
//! strengths: `L0` treats `F` as an unknown call and can only fold around it,
//! `L1` knows `F(a, b) = a % b` and folds through it. Since every generated
//! expression contains at least one `F` call, `L0` never recovers a value and
//! `L1` always does; the scheme's strength rests entirely on `F` staying
//! opaque to the attacker.

use serde::{Deserialize, Serialize};

use crate::hider::{f_eval, mod_nonneg, HiddenExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdversaryLevel {
    /// `F` is an uninterpreted call.
    L0,
    /// `F` is known.
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "kind", content = "value")]
pub enum FoldOutcome {
    Recovered(i64),
    Stuck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldResult {
    pub outcome: FoldOutcome,
    /// Number of fold rewrites applied.
    pub steps: usize,
    /// The fixpoint expression.
    pub residual: HiddenExpr,
}

impl FoldResult {
    pub fn recovered(&self) -> Option<i64> {
        match self.outcome {
            FoldOutcome::Recovered(v) => Some(v),
            FoldOutcome::Stuck => None,
        }
    }
}

/// Fold constant subexpressions to a fixpoint.
///
/// Rewrites whose result would be undefined (overflow, out-of-domain `%` or
/// `F`) are not applied, so the fold is sound: a recovered value always
/// equals the expression's value.
pub fn fold(expr: &HiddenExpr, level: AdversaryLevel) -> FoldResult {
    let mut steps = 0;
    let residual = fold_node(expr, level, &mut steps);
    let outcome = match residual.as_lit() {
        Some(v) => FoldOutcome::Recovered(v),
        None => FoldOutcome::Stuck,
    };
    FoldResult {
        outcome,
        steps,
        residual,
    }
}

fn fold_node(expr: &HiddenExpr, level: AdversaryLevel, steps: &mut usize) -> HiddenExpr {
    use HiddenExpr::*;
    let lits = |l: &HiddenExpr, r: &HiddenExpr| Some((l.as_lit()?, r.as_lit()?));
    let folded = match expr {
        Lit(v) => return Lit(*v),
        Neg(x) => {
            let x = fold_node(x, level, steps);
            match x.as_lit().and_then(i64::checked_neg) {
                Some(v) => Some(v),
                None => return HiddenExpr::neg(x),
            }
        }
        Add(l, r) | Mul(l, r) | Mod(l, r) | CallF(l, r) => {
            let l = fold_node(l, level, steps);
            let r = fold_node(r, level, steps);
            let value = lits(&l, &r).and_then(|(a, b)| match expr {
                Add(..) => a.checked_add(b),
                Mul(..) => a.checked_mul(b),
                Mod(..) => mod_nonneg(a, b).ok(),
                CallF(..) if level == AdversaryLevel::L1 => f_eval(a, b).ok(),
                _ => None,
            });
            match value {
                Some(v) => Some(v),
                None => {
                    return match expr {
                        Add(..) => HiddenExpr::add(l, r),
                        Mul(..) => HiddenExpr::mul(l, r),
                        Mod(..) => HiddenExpr::modulo(l, r),
                        _ => HiddenExpr::call_f(l, r),
                    }
                }
            }
        }
    };
    *steps += 1;
    Lit(folded.expect("set on every folding path"))
}

/// One hidden site as seen by the metrics.
#[derive(Debug, Clone)]
pub struct HiddenSite<'a> {
    pub file: &'a str,
    pub site_index: usize,
    pub expr: &'a HiddenExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSize<'a> {
    pub file: &'a str,
    pub input_bytes: usize,
    pub output_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteMetrics {
    pub file: String,
    pub site_index: usize,
    /// Node count of the replacement; the original literal counts 1.
    pub potency: usize,
    /// Operations the replacement costs at run time.
    pub cost_ops: usize,
    pub l0: FoldOutcome,
    pub l0_steps: usize,
    pub l1: FoldOutcome,
    pub l1_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileCost {
    pub file: String,
    pub input_bytes: usize,
    pub output_bytes: usize,
    /// `output_bytes / input_bytes`; absent for empty inputs.
    pub cost_size_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sites: Vec<SiteMetrics>,
    pub files: Vec<FileCost>,
    pub hidden_sites: usize,
    /// Fraction of hidden sites not recovered; absent when nothing was hidden.
    pub resilience_l0: Option<f64>,
    pub resilience_l1: Option<f64>,
    pub mean_potency: Option<f64>,
    pub total_cost_ops: usize,
}

pub fn measure(sites: &[HiddenSite<'_>], files: &[FileSize<'_>]) -> MetricsReport {
    let per_site: Vec<SiteMetrics> = sites
        .iter()
        .map(|s| {
            let l0 = fold(s.expr, AdversaryLevel::L0);
            let l1 = fold(s.expr, AdversaryLevel::L1);
            SiteMetrics {
                file: s.file.to_string(),
                site_index: s.site_index,
                potency: s.expr.node_count(),
                cost_ops: s.expr.op_count(),
                l0: l0.outcome,
                l0_steps: l0.steps,
                l1: l1.outcome,
                l1_steps: l1.steps,
            }
        })
        .collect();
    let n = per_site.len();
    let resilience = |pick: fn(&SiteMetrics) -> FoldOutcome| {
        (n > 0).then(|| {
            let recovered = per_site
                .iter()
                .filter(|m| matches!(pick(m), FoldOutcome::Recovered(_)))
                .count();
            1.0 - recovered as f64 / n as f64
        })
    };
    MetricsReport {
        resilience_l0: resilience(|m| m.l0),
        resilience_l1: resilience(|m| m.l1),
        mean_potency: (n > 0)
            .then(|| per_site.iter().map(|m| m.potency).sum::<usize>() as f64 / n as f64),
        total_cost_ops: per_site.iter().map(|m| m.cost_ops).sum(),
        hidden_sites: n,
        files: files
            .iter()
            .map(|f| FileCost {
                file: f.file.to_string(),
                input_bytes: f.input_bytes,
                output_bytes: f.output_bytes,
                cost_size_ratio: (f.input_bytes > 0)
                    .then(|| f.output_bytes as f64 / f.input_bytes as f64),
            })
            .collect(),
        sites: per_site,
    }
}
