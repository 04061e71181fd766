//! The full augmentation loop in equivalent mode, with mock oracles.
//!
//! Equivalent mode anchors every specification to the seed problem: before
//! a single variant is sampled, the verifier must reproduce the seed's
//! official answer on the teacher's base assignment. The scripted teacher
//! below gets it wrong on its first attempt (the verifier multiplies where
//! it should add), receives the failure back as structured feedback, and
//! corrects itself on the second attempt.
//!
//! Run with `cargo run --example equivalent_pipeline`.

use std::collections::BTreeMap;

use vera::oracles::mock::{PerfectJudge, ScriptedTeacher};
use vera::synthesis::augment_seed;
use vera::{GenerationConfig, Mode, SeedProblem};

fn payload(verifier_return: &str) -> String {
    serde_json::json!({
        "language_wrapper": "Compute {a} + {b}.",
        "slots": {
            "a": {"kind": "int", "bounds": [1.0, 50.0], "description": "first addend"},
            "b": {"kind": "int", "bounds": [1.0, 50.0], "description": "second addend"}
        },
        "generator": {
            "type": "speclang-v1",
            "code": "def generator(rng):\n    return {'a': rng.randint(1, 50), 'b': rng.randint(1, 50)}"
        },
        "verifier": {
            "type": "speclang-v1",
            "code": format!("def verifier(assign):\n    return True, {verifier_return}")
        },
        "hardness_rationale": "same structure, fresh numbers",
        "base_assignment": {"a": 40, "b": 2}
    })
    .to_string()
}

fn main() {
    let seed = SeedProblem {
        id: "sum-2024".to_string(),
        year: 2024,
        question: "Compute 40 + 2.".to_string(),
        answer: "42".to_string(),
    };
    let teacher = ScriptedTeacher::new(BTreeMap::from([(
        seed.id.clone(),
        vec![
            payload("assign['a'] * assign['b']"), // 80, not 42: rejected
            payload("assign['a'] + assign['b']"),
        ],
    )]));

    let cfg = GenerationConfig::default();
    let (variants, artifacts, summary) =
        augment_seed(&seed, &cfg, Mode::E, &teacher, &PerfectJudge::new());

    println!(
        "{} prompt attempts, {} samples, {} accepted variants",
        summary.total_prompt_attempts, summary.total_samples, summary.valid_variants
    );
    println!("failure categories on the way: {:?}", summary.failures);
    println!("compiled specs recorded for audit: {}", artifacts.len());
    println!();
    for v in &variants {
        println!(
            "{} (sample {}): \"{}\" -> {}",
            v.generator_id, v.sample_index, v.question_text, v.correct_answer.text
        );
    }
}
