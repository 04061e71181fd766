//! Prompt construction for the remote Teacher, Judge, and Ranker roles.
//! Mock oracles never see these; the texts only shape remote replies, and
//! all replies flow through the parsers regardless of origin.

use std::fmt::Write;

use crate::model::{Mode, SeedProblem};
use crate::oracles::RankerCandidate;

/// System text for hardening proposals.
pub const TEACHER_SYSTEM_H: &str = "You are an experienced math olympiad problem setter who specializes in making existing AIME problems harder and more generalizable.

You are given a seed problem from an AIME contest, and need to generate a more difficult problem family based on that.

Please modify at least one condition of the seed problem to design a new, more difficult problem family. This new problem family must require a different and more advanced solution approach from the original and should not be solvable by guessing.

The problem family must be of such quality and novelty that any instance could be accepted at IMO, AIME, or serve as valuable training exercise.

Furthermore, please provide a proof of correctness, and a clear explanation for your generalized family in the metadata.

Always return ONE JSON object. No commentary.";

/// System text for equivalence-preserving proposals.
pub const TEACHER_SYSTEM_E: &str = "You are an experienced math olympiad problem setter who specializes in re-parameterizing existing AIME problems without changing their substance.

You are given a seed problem from an AIME contest, and need to generate an equivalent problem family based on that.

Please turn the concrete quantities of the seed problem into slots of a problem family. The family must keep the original solution approach and difficulty, and its base assignment must reproduce the seed problem exactly: rendering the template with the base values must restate the seed question, and the verifier on the base values must return the seed's official answer.

Always return ONE JSON object. No commentary.";

/// System text for judging a candidate answer.
pub const JUDGE_SYSTEM: &str = "You are a meticulous mathematics judge. Determine if a proposed answer solves the problem exactly.

You will see a Teacher model's reasoning and proposed generalization, but it may contain mistakes. Evaluate the problem + candidate answer independently; only output 'True' if the reasoning and computations fully justify the answer.";

/// Final instruction line of every judge prompt.
pub const JUDGE_VERDICT_INSTRUCTION: &str =
    "Return an explanation followed by a final line that is exactly True or False.";

/// System text for hardest-variant selection.
pub const RANKER_SYSTEM: &str = "You are ranking math contest problems by difficulty.

Given several variants derived from the same seed, choose the hardest one. Consider: complexity, number of steps, tricky reasoning, boundary cases.";

fn schema_guide(mode: Mode) -> String {
    let base_assignment_note = match mode {
        Mode::E => "required: slot values whose rendered instance is the seed problem",
        Mode::H => "optional",
    };
    format!(
        r#"Return a JSON object with exactly this shape:
{{
  "language_wrapper": "In a math contest, {{alpha}} students ...",
  "slots": {{
    "alpha": {{"kind": "int", "bounds": [lo, hi], "description": "total students", "harder_than_seed": true}}
  }},
  "generator": {{"type": "speclang-v1", "code": "def generator(rng):\n    ..."}},
  "verifier": {{"type": "speclang-v1", "code": "def verifier(assign):\n    ..."}},
  "hardness_rationale": "why this family is placed as it is",
  "notes": "optional implementation notes",
  "meta": {{"seed_id": "<id>", "source_year": <year>}},
  "base_assignment": {{"alpha": ...}} ({base_assignment_note}),
  "carriers": ["optional alternative wordings using the same slots"]
}}
Slot kinds are "int", "rational", "real", or "categorical" (with "choices").
Programs must use the restricted language only: 4-space indents; the generator is `def generator(rng):` returning a map of every slot, the verifier is `def verifier(assign):` returning `(valid, answer)`; statements are assignment, `if`/`elif`/`else`, `for ... in range(...)`, `while`, `assert`, and `return`; builtins are abs, min, max, len, floor, ceil, sqrt, gcd, round, pow, fraction, str, int, float plus the constants pi and e; randomness only through rng.random, rng.randint, rng.uniform, rng.choice, rng.shuffle, rng.gauss, rng.gammavariate inside the generator. No imports, no function definitions beyond the one required, no attribute access except rng methods."#
    )
}

/// Build the full teacher prompt for one proposal round. Hardening mode
/// leads with the hardening system text; equivalent mode asks for an
/// answer-preserving re-parameterization. Diagnostics from the previous
/// attempt, when present, are appended under a fixed header.
pub fn build_teacher_prompt(seed: &SeedProblem, mode: Mode, feedback: Option<&str>) -> String {
    let system = match mode {
        Mode::E => TEACHER_SYSTEM_E,
        Mode::H => TEACHER_SYSTEM_H,
    };
    let mut prompt = format!(
        "{system}\n\n{guide}\n\nSeed problem {id} (AIME {year}):\n{question}\n\nOfficial answer: {answer}\n",
        guide = schema_guide(mode),
        id = seed.id,
        year = seed.year,
        question = seed.question,
        answer = seed.answer,
    );
    if let Some(feedback) = feedback {
        write!(prompt, "\nPrevious attempt diagnostics:\n{feedback}\n").expect("infallible");
    }
    prompt
}

/// Build the judge prompt for one trial. The verdict instruction is the
/// final line so the reply's last line carries the verdict.
pub fn build_judge_prompt(question: &str, candidate: &str) -> String {
    format!(
        "{JUDGE_SYSTEM}\n\nProblem:\n{question}\n\nProposed answer: {candidate}\n\n{JUDGE_VERDICT_INSTRUCTION}"
    )
}

/// Build the ranking prompt over a candidate pool.
pub fn build_ranker_prompt(members: &[RankerCandidate]) -> String {
    let mut prompt = format!("{RANKER_SYSTEM}\n\nVariants:\n");
    for member in members {
        writeln!(prompt, "[{}] {}", member.id, member.text).expect("infallible");
    }
    prompt.push_str(
        "\nRespond with JSON: {\"hardest_variant\": \"<id>\", \"reason\": \"...\"}",
    );
    prompt
}
