//! Compile a teacher reply into an executable specification and sample
//! deterministic variants from it.
//!
//! The reply below is what a teacher oracle would send back for a toy seed
//! problem: prose around one JSON object holding the template, the slot
//! schema, a generator program, and a verifier program. This example walks
//! the same path the pipeline takes — extract, validate, compile, sample,
//! render, verify — but one step at a time.
//!
//! Run with `cargo run --example compile_and_sample`.

use vera::oracles::parse_teacher_payload;
use vera::runtime::{derive_seed, run_generator_with_rng, run_verifier, Budget, SpecRng};
use vera::speclang::{compile_program, Role};
use vera::synthesis::spec_from_payload;
use vera::templating::render;
use vera::{Mode, SeedProblem};

const TEACHER_REPLY: &str = r#"
The sum keeps its structure when both addends move, so the specification
varies them independently and recomputes the answer in the verifier.

{
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
    "code": "def verifier(assign):\n    return True, assign['a'] + assign['b']"
  },
  "hardness_rationale": "same structure, fresh numbers",
  "base_assignment": {"a": 40, "b": 2}
}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = SeedProblem {
        id: "sum-2024".to_string(),
        year: 2024,
        question: "Compute 40 + 2.".to_string(),
        answer: "42".to_string(),
    };

    let payload = parse_teacher_payload(TEACHER_REPLY, &seed)?;
    let spec = spec_from_payload(&seed, Mode::E, &payload)
        .map_err(|problems| problems.join("; "))?;
    println!("seed '{}' compiled into a spec with {} slots", spec.seed_id, spec.slots.len());

    let generator = compile_program(&spec.generator_src, Role::Generator, &spec.slots)
        .map_err(|diags| format!("generator rejected: {}", diags[0]))?;
    let verifier = compile_program(&spec.verifier_src, Role::Verifier, &spec.slots)
        .map_err(|diags| format!("verifier rejected: {}", diags[0]))?;

    // Each sample runs on its own stream, derived from the seed id, the
    // generator id, and the sample index — nothing else. Rerunning this
    // example reproduces every line below bit for bit.
    let budget = Budget::default();
    let generator_id = format!("{}_prompt1", seed.id);
    for sample_index in 1..=4u32 {
        let stream = derive_seed(&seed.id, &generator_id, sample_index);
        let mut rng = SpecRng::seed(stream);
        let outcome = run_generator_with_rng(&generator, &mut rng, &budget, &spec.slots);
        let assignment = outcome.value.ok_or("generator failed")?;
        let rendered = render(&spec, &assignment, 0)?;
        let verdict = run_verifier(&verifier, &assignment, &budget).value.ok_or("verifier failed")?;
        let answer = verdict.answer.map(|a| a.text).unwrap_or_else(|| "-".to_string());
        println!(
            "sample {sample_index} on stream {stream:#018x}: \"{}\" -> {answer} ({} steps)",
            rendered.text, outcome.steps_used
        );
    }
    Ok(())
}
