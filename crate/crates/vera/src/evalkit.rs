//! Scores an answering oracle over seed problems and sampled variants, and
//! computes the reported statistics: Avg@K per item, per-kind means and
//! their exact (unrounded) difference, conditional stability of variants
//! given seed success, Spearman rank correlation between score vectors, and
//! seeded bootstrap confidence intervals over run-level metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{answers_match, Answer};
use crate::oracles::{parse_student_answer, StudentOracle};
use crate::runtime::SpecRng;

/// Bootstrap resample count.
const RESAMPLES: usize = 10_000;

/// Fixed stream for bootstrap resampling, so confidence intervals are
/// reproducible byte-for-byte.
const BOOTSTRAP_SEED: u64 = 0xB007_5EED;

/// Errors from the statistics helpers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("variant '{0}' has no evaluated seed")]
    UnpairedVariant(String),
}

/// What an evaluated item is, for aggregate splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Seed,
    Variant,
    VariantHard,
}

/// One dataset item ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub item_id: String,
    pub kind: ItemKind,
    pub question: String,
    pub gold: Answer,
    /// The seed item a variant is paired with, for stability accounting.
    pub seed_id: Option<String>,
}

/// One student attempt: the raw reply, what was extracted from it, and
/// whether it matched the gold answer. Transport failures score as
/// incorrect with the error preserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub raw_text: String,
    pub extracted: Answer,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-item evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub item_id: String,
    pub kind: ItemKind,
    pub attempts: Vec<AttemptRecord>,
    pub avg_at_k: f64,
}

/// Aggregate statistics over one report. `delta` is always the exact
/// difference `variant_mean - seed_mean`, never a rounded reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean_avg_at_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_stability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_across_models: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman_vs: Option<BTreeMap<String, f64>>,
}

/// Percentile bootstrap over run-level metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStats {
    #[serde(rename = "R")]
    pub resamples: u32,
    pub mean: f64,
    pub stdev: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// The full evaluation report written to `--report_json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_id: String,
    pub model_name: String,
    pub runs: u32,
    pub tolerance: f64,
    pub items: Vec<ItemResult>,
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapStats>,
}

/// Mean correctness over independent attempts.
pub fn avg_at_k(corrects: &[bool]) -> f64 {
    assert!(!corrects.is_empty(), "avg_at_k needs at least one attempt");
    corrects.iter().filter(|c| **c).count() as f64 / corrects.len() as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two
/// observations.
pub fn sample_stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn mean_of(items: &[ItemResult], keep: impl Fn(ItemKind) -> bool) -> Option<f64> {
    let scores: Vec<f64> =
        items.iter().filter(|i| keep(i.kind)).map(|i| i.avg_at_k).collect();
    (!scores.is_empty()).then(|| mean(&scores))
}

/// Evaluate every item `runs` times. Each attempt is tagged with
/// `(item_id, run)` so deterministic students replay exactly; a transport
/// failure scores that one attempt as incorrect with the error recorded.
/// Bootstrap statistics over the run-level means appear when `runs >= 2`,
/// and conditional stability when every variant is paired with an
/// evaluated seed.
pub fn eval_dataset(
    dataset_id: &str,
    model_name: &str,
    items: &[EvalItem],
    student: &dyn StudentOracle,
    runs: u32,
    tolerance: f64,
) -> EvalReport {
    assert!(runs >= 1, "evaluation needs at least one run");
    let mut results = Vec::with_capacity(items.len());
    for item in items {
        let mut attempts = Vec::with_capacity(runs as usize);
        for run in 1..=runs {
            match student.answer(&item.item_id, run, &item.question) {
                Ok(raw) => {
                    let extracted = parse_student_answer(&raw);
                    let correct = answers_match(&extracted, &item.gold, tolerance);
                    attempts.push(AttemptRecord { raw_text: raw, extracted, correct, error: None });
                }
                Err(err) => attempts.push(AttemptRecord {
                    raw_text: String::new(),
                    extracted: Answer { text: String::new(), numeric: None },
                    correct: false,
                    error: Some(err.to_string()),
                }),
            }
        }
        let corrects: Vec<bool> = attempts.iter().map(|a| a.correct).collect();
        results.push(ItemResult {
            item_id: item.item_id.clone(),
            kind: item.kind,
            attempts,
            avg_at_k: avg_at_k(&corrects),
        });
    }

    let seed_mean = mean_of(&results, |k| k == ItemKind::Seed);
    let variant_mean = mean_of(&results, |k| k != ItemKind::Seed);
    let delta = match (variant_mean, seed_mean) {
        (Some(v), Some(s)) => Some(v - s),
        _ => None,
    };

    let pairing: BTreeMap<String, String> = items
        .iter()
        .filter(|i| i.kind != ItemKind::Seed)
        .filter_map(|i| i.seed_id.clone().map(|s| (i.item_id.clone(), s)))
        .collect();
    let seeds: Vec<ItemResult> =
        results.iter().filter(|r| r.kind == ItemKind::Seed).cloned().collect();
    let variants: Vec<ItemResult> =
        results.iter().filter(|r| r.kind != ItemKind::Seed).cloned().collect();
    let conditional = if !variants.is_empty() && pairing.len() == variants.len() {
        conditional_stability(&seeds, &variants, &pairing).ok().flatten()
    } else {
        None
    };

    let bootstrap = (runs >= 2).then(|| {
        let per_run: Vec<f64> = (0..runs as usize)
            .map(|r| {
                let corrects: Vec<f64> = results
                    .iter()
                    .map(|item| if item.attempts[r].correct { 1.0 } else { 0.0 })
                    .collect();
                mean(&corrects)
            })
            .collect();
        bootstrap_stats(&per_run)
    });

    let mean_avg_at_k =
        if results.is_empty() { 0.0 } else { mean(&results.iter().map(|r| r.avg_at_k).collect::<Vec<_>>()) };
    EvalReport {
        dataset_id: dataset_id.to_string(),
        model_name: model_name.to_string(),
        runs,
        tolerance,
        items: results,
        aggregates: Aggregates {
            mean_avg_at_k,
            seed_mean,
            variant_mean,
            delta,
            conditional_stability: conditional,
            std_across_models: None,
            spearman_vs: None,
        },
        bootstrap,
    }
}

/// Of the variants whose paired seed was answered correctly (attempt-averaged
/// correctness above one half), the fraction answered correctly themselves.
/// Absent when no paired seed was correct.
pub fn conditional_stability(
    seed_results: &[ItemResult],
    variant_results: &[ItemResult],
    pairing: &BTreeMap<String, String>,
) -> Result<Option<f64>, EvalError> {
    let seed_correct: BTreeMap<&str, bool> =
        seed_results.iter().map(|r| (r.item_id.as_str(), r.avg_at_k > 0.5)).collect();
    let mut eligible = 0u32;
    let mut stable = 0u32;
    for variant in variant_results {
        let seed_id = pairing
            .get(&variant.item_id)
            .ok_or_else(|| EvalError::UnpairedVariant(variant.item_id.clone()))?;
        let seed_ok = seed_correct
            .get(seed_id.as_str())
            .ok_or_else(|| EvalError::UnpairedVariant(variant.item_id.clone()))?;
        if *seed_ok {
            eligible += 1;
            if variant.avg_at_k > 0.5 {
                stable += 1;
            }
        }
    }
    if eligible == 0 {
        return Ok(None);
    }
    Ok(Some(stable as f64 / eligible as f64))
}

/// Positions in ascending order, ties replaced by the average of the
/// positions they span (1-based).
fn fractional_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("ranks need finite values"));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &index in &order[i..=j] {
            ranks[index] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of fractional ranks with
/// average-rank ties. Constant, unequal-length, or too-short inputs are
/// degenerate.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(EvalError::DegenerateInput(
            "lists must have equal length of at least two".to_string(),
        ));
    }
    let rx = fractional_ranks(xs);
    let ry = fractional_ranks(ys);
    let mx = mean(&rx);
    let my = mean(&ry);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in rx.iter().zip(&ry) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(EvalError::DegenerateInput("constant list has no ranks".to_string()));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Mean, sample stdev, and a 2.5/97.5 percentile interval from 10,000
/// seeded bootstrap resamples of the run-level metrics.
pub fn bootstrap_stats(per_run_metrics: &[f64]) -> BootstrapStats {
    assert!(per_run_metrics.len() >= 2, "bootstrap needs at least two runs");
    let n = per_run_metrics.len();
    let mut rng = SpecRng::seed(BOOTSTRAP_SEED);
    let mut means = Vec::with_capacity(RESAMPLES);
    for _ in 0..RESAMPLES {
        let mut total = 0.0;
        for _ in 0..n {
            let index = rng.randint(0, n as i64 - 1).expect("nonempty range") as usize;
            total += per_run_metrics[index];
        }
        means.push(total / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite metrics"));
    let pick = |p: f64| means[((p * RESAMPLES as f64).ceil() as usize).max(1) - 1];
    BootstrapStats {
        resamples: RESAMPLES as u32,
        mean: mean(per_run_metrics),
        stdev: sample_stdev(per_run_metrics),
        ci_low: pick(0.025),
        ci_high: pick(0.975),
    }
}
