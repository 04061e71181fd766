//! Build a hardened pool per seed and pick the single hardest variant.
//!
//! The paired-hardest regime keeps one variant per seed: a pool of verified
//! hardened variants goes to a ranking oracle, which only orders them — it
//! never touches labels. The chosen record is marked `pro_selected`; if the
//! ranker names an unknown id or fails outright, a deterministic fallback
//! (the lexicographically smallest variant) is chosen and marked
//! `pro_fallback` so downstream consumers can see it.
//!
//! Run with `cargo run --example paired_hardest`.

use vera::judging::select_hardest;
use vera::oracles::mock::{LongestRanker, PerfectJudge, ScriptedRanker, ScriptedTeacher};
use vera::synthesis::augment_seed;
use vera::{GenerationConfig, Mode, SeedProblem};

const REPLY: &str = r#"
{
  "language_wrapper": "What is {a} times {b}?",
  "carriers": [
    "Multiplying {a} by {b} in your head, what do you get?",
    "A rectangle is {a} units by {b} units; how many unit squares does it cover?"
  ],
  "slots": {
    "a": {"kind": "int", "bounds": [11.0, 99.0], "description": "first factor", "harder_than_seed": true},
    "b": {"kind": "int", "bounds": [11.0, 99.0], "description": "second factor", "harder_than_seed": true}
  },
  "generator": {
    "type": "speclang-v1",
    "code": "def generator(rng):\n    return {'a': rng.randint(11, 99), 'b': rng.randint(11, 99)}"
  },
  "verifier": {
    "type": "speclang-v1",
    "code": "def verifier(assign):\n    return True, assign['a'] * assign['b']"
  },
  "hardness_rationale": "two-digit factors instead of one-digit",
  "base_assignment": null
}
"#;

fn main() {
    let seed = SeedProblem {
        id: "times-7x8".to_string(),
        year: 2023,
        question: "What is 7 times 8?".to_string(),
        answer: "56".to_string(),
    };
    let teacher = ScriptedTeacher::single(&seed.id, REPLY);
    let cfg = GenerationConfig::default();
    let (pool, _, summary) = augment_seed(&seed, &cfg, Mode::H, &teacher, &PerfectJudge::new());
    println!("pool of {} verified hardened variants:", summary.valid_variants);
    for v in &pool {
        println!("  {}: \"{}\"", v.variant_id(), v.question_text);
    }

    let chosen = select_hardest(&pool, &LongestRanker).expect("pool is nonempty");
    println!(
        "\nlongest-text ranker picked {}: \"{}\" (pro_selected = {})",
        chosen.variant_id(),
        chosen.question_text,
        chosen.metadata.get("pro_selected").map(String::as_str).unwrap_or("false")
    );

    let confused = ScriptedRanker::new("no-such-variant");
    let fallback = select_hardest(&pool, &confused).expect("pool is nonempty");
    println!(
        "a ranker naming an unknown id falls back to {} (pro_fallback = {})",
        fallback.variant_id(),
        fallback.metadata.get("pro_fallback").map(String::as_str).unwrap_or("false")
    );
}
