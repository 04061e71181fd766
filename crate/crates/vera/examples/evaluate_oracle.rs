//! Score an answering oracle on a dataset and print the reproducible report.
//!
//! Evaluation asks the student for each item `runs` times, extracts an
//! answer from each raw reply, and aggregates: Avg@k per item, means over
//! seeds and variants separately, their exact difference, conditional
//! stability (of the seeds the student gets right, how many of their
//! variants hold up), and a percentile bootstrap over the run-level means.
//! The scripted student below knows the two seed questions cold but
//! stumbles on renamed variants of the second one.
//!
//! Run with `cargo run --example evaluate_oracle`.

use std::collections::BTreeMap;

use vera::evalkit::{eval_dataset, EvalItem, ItemKind};
use vera::model::normalize_answer;
use vera::oracles::mock::ScriptedStudent;

fn item(item_id: &str, kind: ItemKind, question: &str, gold: &str, seed_id: Option<&str>) -> EvalItem {
    EvalItem {
        item_id: item_id.to_string(),
        kind,
        question: question.to_string(),
        gold: normalize_answer(gold).expect("gold answers are well-formed"),
        seed_id: seed_id.map(str::to_string),
    }
}

fn main() {
    let items = vec![
        item("sum-2024", ItemKind::Seed, "Compute 40 + 2.", "42", None),
        item("mod-77", ItemKind::Seed, "Find 77 mod 10.", "7", None),
        item("sum-2024_v1", ItemKind::Variant, "Compute 19 + 4.", "23", Some("sum-2024")),
        item("sum-2024_v2", ItemKind::Variant, "Compute 31 + 11.", "42", Some("sum-2024")),
        item("mod-77_v1", ItemKind::Variant, "Find 913 mod 11.", "0", Some("mod-77")),
    ];

    // One scripted reply list per item; the last entry repeats across runs.
    let student = ScriptedStudent::new(BTreeMap::from([
        ("sum-2024".to_string(), vec!["The answer is 42.".to_string()]),
        ("mod-77".to_string(), vec!["7".to_string()]),
        ("sum-2024_v1".to_string(), vec!["23".to_string()]),
        ("sum-2024_v2".to_string(), vec!["It should be 42.".to_string()]),
        (
            "mod-77_v1".to_string(),
            vec!["83".to_string(), "0".to_string(), "83".to_string()],
        ),
    ]));

    let report = eval_dataset("toy-five-items", "scripted-demo", &items, &student, 5, 1e-3);

    println!("dataset {} under model {}:", report.dataset_id, report.model_name);
    for r in &report.items {
        println!("  {:<12} Avg@{} = {:.2}", r.item_id, report.runs, r.avg_at_k);
    }
    let agg = &report.aggregates;
    println!("mean Avg@k over all items: {:.4}", agg.mean_avg_at_k);
    println!(
        "seed mean {:.4}, variant mean {:.4}, delta {:.4}",
        agg.seed_mean.unwrap_or(f64::NAN),
        agg.variant_mean.unwrap_or(f64::NAN),
        agg.delta.unwrap_or(f64::NAN)
    );
    if let Some(cs) = agg.conditional_stability {
        println!("conditional stability of correct seeds: {cs:.4}");
    }
    if let Some(b) = &report.bootstrap {
        println!(
            "bootstrap over {} resamples: mean {:.4}, stdev {:.4}, 95% CI [{:.4}, {:.4}]",
            b.resamples, b.mean, b.stdev, b.ci_low, b.ci_high
        );
    }
}
