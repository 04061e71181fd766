//! Hardened mode: variants must survive a judge that is also shown noise.
//!
//! A hardened variant is not anchored to the seed's answer — the point is a
//! new, harder instance — so the gate is different: the judge is shown the
//! verifier's answer twice and three deliberately perturbed answers, in a
//! seeded shuffle, and must be right on at least 4 of the 5 calls. A judge
//! that rubber-stamps everything True gets the two correct trials and
//! fails all three noise trials, so nothing it approves is ever released.
//!
//! Run with `cargo run --example hardened_pipeline`.

use vera::oracles::mock::{AlwaysTrueJudge, PerfectJudge, ScriptedTeacher};
use vera::oracles::JudgeOracle;
use vera::synthesis::augment_seed;
use vera::{GenerationConfig, Mode, SeedProblem};

const REPLY: &str = r#"
{
  "language_wrapper": "Find the remainder of {n} modulo {m}.",
  "slots": {
    "n": {"kind": "int", "bounds": [100.0, 999.0], "description": "dividend", "harder_than_seed": true},
    "m": {"kind": "int", "bounds": [7.0, 13.0], "description": "modulus"}
  },
  "generator": {
    "type": "speclang-v1",
    "code": "def generator(rng):\n    return {'n': rng.randint(100, 999), 'm': rng.randint(7, 13)}"
  },
  "verifier": {
    "type": "speclang-v1",
    "code": "def verifier(assign):\n    return True, assign['n'] - floor(assign['n'] / assign['m']) * assign['m']"
  },
  "hardness_rationale": "three-digit dividends instead of the seed's two",
  "base_assignment": null
}
"#;

fn run(judge: &dyn JudgeOracle, label: &str) {
    let seed = SeedProblem {
        id: "mod-77".to_string(),
        year: 2024,
        question: "Find the remainder of 77 modulo 10.".to_string(),
        answer: "7".to_string(),
    };
    let teacher = ScriptedTeacher::single(&seed.id, REPLY);
    let cfg = GenerationConfig { prompt_attempt_limit: 3, ..GenerationConfig::default() };
    let (variants, _, summary) = augment_seed(&seed, &cfg, Mode::H, &teacher, judge);

    let fallback = variants.iter().any(|v| v.metadata.get("fallback").is_some());
    println!(
        "{label}: {} samples judged, {} released{}",
        summary.total_samples,
        if fallback { 0 } else { variants.len() },
        if fallback { " (fallback rephrasings only)" } else { "" }
    );
    if let Some(v) = variants.iter().find(|v| v.judge_consistent && !v.judge_trials.is_empty()) {
        println!("  \"{}\" -> {}", v.question_text, v.correct_answer.text);
        for t in &v.judge_trials {
            println!(
                "    shown {:>6} ({}) judged {} -> {}",
                t.candidate.text,
                if t.is_noise { "noise" } else { "correct" },
                t.observed,
                if t.success { "ok" } else { "MISSED" }
            );
        }
    }
}

fn main() {
    run(&PerfectJudge::new(), "perfect judge");
    run(&AlwaysTrueJudge, "always-True judge");
}
